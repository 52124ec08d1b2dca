#include <gtest/gtest.h>

#include <random>

#include "adsv/error.hpp"
#include "adsv/rules.hpp"

using namespace adsv;
using namespace adsv::rules;

namespace {

// speed:ego and the four pairwise channels for an ego approaching a lead.
Trace pair_trace(const std::vector<double>& speed, const std::vector<double>& gap,
                 const std::vector<double>& closing, const std::vector<double>& collision,
                 double dt = 0.5) {
  const std::vector<std::string> p = {"ego", "lead"};
  Trace tr(dt, {{"speed", {"ego"}}, {"gap", p}, {"closing_speed", p}, {"ttc", p}, {"collision", p}});
  for (std::size_t i = 0; i < speed.size(); ++i) {
    const double row[] = {speed[i], gap[i], closing[i], ttc(gap[i], closing[i]), collision[i]};
    tr.push_row(static_cast<double>(i) * dt, row);
  }
  return tr;
}

FunctionalScenario scenario(bool reasonable) {
  FunctionalScenario fs;
  fs.id = "f";
  fs.exposure = {Exposure::Kind::RatePerHour, 2.0, {}};
  fs.others_reasonable = reasonable;
  return fs;
}

ConcreteScenario concrete(std::map<std::string, double> a = {}) {
  return ConcreteScenario{"c-000000", "l", 1, std::move(a)};
}

const char* kCollisionRules = R"(
rule no_collision prescriptive
  when meta(others_reasonable)
  assert never(collision(ego, lead) > 0)

rule collision_severity risk
  severity S0 if eventually(collision(ego, lead) > 0)
  severity S1 if eventually(collision(ego, lead) > 0 and closing_speed(ego, lead) / 2 >= 1)
  severity S2 if eventually(collision(ego, lead) > 0 and closing_speed(ego, lead) / 2 >= 4)
  severity S3 if eventually(collision(ego, lead) > 0 and closing_speed(ego, lead) / 2 >= 11)
)";

Trace crash_at(double closing) {
  return pair_trace({20, 20, 20, 5}, {4, 2, 0, 0}, {closing, closing, closing, 0}, {0, 0, 1, 1});
}

Trace clean() { return pair_trace({20, 20, 20}, {40, 35, 30}, {10, 10, 10}, {0, 0, 0}); }

const Expr& assertion(const RuleSet& rs, std::size_t i = 0) { return **rs.rules.at(i).assertion; }

}  // namespace

TEST(EvaluateRules, CollisionWithReasonableOthersFails) {
  RuleSet rs = parse_ruleset(kCollisionRules);
  RunOutcome out = evaluate_rules(rs, crash_at(30), concrete(), scenario(true));
  ASSERT_TRUE(is_failure(out));
  EXPECT_EQ(std::get<PrescriptiveFailure>(out).violated_rules,
            std::vector<std::string>{"no_collision"});
}

TEST(EvaluateRules, CollisionWithUnreasonableOthersIsScored) {
  RuleSet rs = parse_ruleset(kCollisionRules);
  auto sev = [&](double closing) {
    RunOutcome out = evaluate_rules(rs, crash_at(closing), concrete(), scenario(false));
    return std::get<Scored>(out).severity;
  };
  EXPECT_EQ(sev(30.0), Severity::S3);
  EXPECT_EQ(sev(22.0), Severity::S3);
  EXPECT_EQ(sev(21.9), Severity::S2);
  EXPECT_EQ(sev(8.0), Severity::S2);
  EXPECT_EQ(sev(2.0), Severity::S1);
  EXPECT_EQ(sev(1.0), Severity::S0);
}

TEST(EvaluateRules, NothingFiresGivesNone) {
  RuleSet rs = parse_ruleset(kCollisionRules);
  RunOutcome out = evaluate_rules(rs, clean(), concrete(), scenario(true));
  EXPECT_EQ(std::get<Scored>(out).severity, Severity::None);
}

TEST(EvaluateRules, CollectsAllViolatedPrescriptiveRules) {
  RuleSet rs = parse_ruleset(std::string(kCollisionRules) + R"(
rule slow prescriptive assert always(speed(ego) < 10)
rule fine prescriptive assert always(speed(ego) >= 0)
)");
  RunOutcome out = evaluate_rules(rs, crash_at(30), concrete(), scenario(true));
  EXPECT_EQ(std::get<PrescriptiveFailure>(out).violated_rules,
            (std::vector<std::string>{"no_collision", "slow"}));
}

TEST(EvaluateRules, UnresolvableReferencesNameRuleAndReference) {
  RuleSet rs = parse_ruleset("rule needs_param prescriptive assert always(speed(ego) < param(\"vmax\"))");
  try {
    evaluate_rules(rs, clean(), concrete(), scenario(true));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("needs_param"), std::string::npos) << msg;
    EXPECT_NE(msg.find("vmax"), std::string::npos) << msg;
  }
  RuleSet rs2 = parse_ruleset("rule needs_chan prescriptive assert always(speed(lead) < 1)");
  try {
    evaluate_rules(rs2, clean(), concrete(), scenario(true));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("needs_chan"), std::string::npos) << msg;
    EXPECT_NE(msg.find("speed:lead"), std::string::npos) << msg;
  }
  EXPECT_NO_THROW(evaluate_rules(rs, clean(), concrete({{"vmax", 30}}), scenario(true)));
}

TEST(EvaluateRules, SkippedRulesNeedNoReferences) {
  RuleSet rs = parse_ruleset(
      "rule r prescriptive when meta(others_reasonable) assert always(speed(lead) < 1)");
  EXPECT_EQ(std::get<Scored>(evaluate_rules(rs, clean(), concrete(), scenario(false))).severity,
            Severity::None);
}

TEST(EvaluateRules, ParamsAndMetadata) {
  RuleSet rs = parse_ruleset(R"(
rule r risk
  when param("v") > 10 and meta("exposure_value") == 2 and not meta(others_reasonable)
  severity S2 if always(speed(ego) <= param("v") * 2)
)");
  EXPECT_EQ(std::get<Scored>(evaluate_rules(rs, clean(), concrete({{"v", 10.5}}), scenario(false)))
                .severity,
            Severity::S2);
  EXPECT_EQ(std::get<Scored>(evaluate_rules(rs, clean(), concrete({{"v", 9}}), scenario(false)))
                .severity,
            Severity::None);
  EXPECT_EQ(std::get<Scored>(evaluate_rules(rs, clean(), concrete({{"v", 10.5}}), scenario(true)))
                .severity,
            Severity::None);
}

TEST(Evaluator, ReductionsAndDuration) {
  Trace tr = pair_trace({5, 7, 3, 9}, {10, 8, 6, 4}, {1, 1, 1, 1}, {0, 0, 0, 0}, 0.5);
  Evaluator ev(tr, {}, {});
  auto val = [&](const char* text) {
    RuleSet rs = parse_ruleset(std::string("rule r prescriptive assert ") + text + " > -1000");
    return ev.value(*std::get<Compare>(assertion(rs).node).lhs);
  };
  EXPECT_EQ(val("min(speed(ego))"), 3.0);
  EXPECT_EQ(val("max(speed(ego) * 2)"), 18.0);
  EXPECT_EQ(val("max(gap(ego, lead) - speed(ego))"), 5.0);
  EXPECT_EQ(val("duration_where(speed(ego) > 4)"), 1.5);
  EXPECT_EQ(val("duration_where(speed(ego) > 100)"), 0.0);
  EXPECT_EQ(val("duration_where(speed(ego) > 0)"), tr.duration());
  EXPECT_EQ(val("(1 + 2) * 3 - 4 / 2"), 7.0);
}

TEST(Evaluator, DurationWithinBounds) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s, g, c, k;
    for (int i = 0; i < 25; ++i) {
      s.push_back(u(rng));
      g.push_back(u(rng));
      c.push_back(u(rng) - 15);
      k.push_back(0);
    }
    Trace tr = pair_trace(s, g, c, k, 0.1);
    Evaluator ev(tr, {}, {});
    RuleSet rs = parse_ruleset("rule r prescriptive assert duration_where(speed(ego) > " +
                               std::to_string(u(rng)) + ") > -1");
    const double d = ev.value(*std::get<Compare>(assertion(rs).node).lhs);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, tr.duration() + 1e-12);
  }
}

TEST(Evaluator, TemporalIdentitiesOnRandomTraces) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s, g, c, k;
    const int n = 2 + trial % 20;
    for (int i = 0; i < n; ++i) {
      s.push_back(u(rng));
      g.push_back(u(rng));
      c.push_back(u(rng) - 15);
      k.push_back(0);
    }
    Trace tr = pair_trace(s, g, c, k, 0.1);
    Evaluator ev(tr, {}, {});
    const std::string p = "speed(ego) > " + std::to_string(u(rng)) + " or gap(ego, lead) < " +
                          std::to_string(u(rng) / 3);
    RuleSet rs = parse_ruleset(
        "rule a prescriptive assert always(" + p + ")\n"
        "rule b prescriptive assert not eventually(not (" + p + "))\n"
        "rule c prescriptive assert never(" + p + ")\n"
        "rule d prescriptive assert not eventually(" + p + ")\n");
    EXPECT_EQ(ev.holds(assertion(rs, 0)), ev.holds(assertion(rs, 1))) << p;
    EXPECT_EQ(ev.holds(assertion(rs, 2)), ev.holds(assertion(rs, 3))) << p;
  }
}

TEST(EvaluateRules, PrescriptiveDominance) {
  RuleSet rs = parse_ruleset(std::string(kCollisionRules) +
                             "rule always_bad risk severity S3 if eventually(speed(ego) > 0)\n");
  EXPECT_TRUE(is_failure(evaluate_rules(rs, crash_at(50), concrete(), scenario(true))));
}

TEST(EvaluateRules, AddingRiskRuleNeverLowersSeverity) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 30);
  const std::vector<std::string> extras = {
      "severity S1 if eventually(speed(ego) > 25)",
      "severity S0 if max(speed(ego)) > 10\n  severity S2 if min(gap(ego, lead)) < 3",
      "severity S3 if duration_where(ttc(ego, lead) < 2) > 0.3",
  };
  RuleSet base = parse_ruleset(kCollisionRules);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<double> s, g, c, k;
    bool hit = false;
    for (int i = 0; i < 10; ++i) {
      s.push_back(u(rng));
      g.push_back(hit ? 0.0 : u(rng) / 3);
      hit = hit || g.back() < 1.0;
      if (hit) g.back() = 0.0;
      c.push_back(u(rng) - 5);
      k.push_back(hit ? 1 : 0);
    }
    Trace tr = pair_trace(s, g, c, k, 0.1);
    const Severity before =
        std::get<Scored>(evaluate_rules(base, tr, concrete(), scenario(false))).severity;
    for (const auto& extra : extras) {
      RuleSet more = parse_ruleset(std::string(kCollisionRules) + "rule extra risk\n  " + extra);
      const Severity after =
          std::get<Scored>(evaluate_rules(more, tr, concrete(), scenario(false))).severity;
      EXPECT_GE(after, before);
    }
  }
}

TEST(EvaluateRules, Pure) {
  RuleSet rs = parse_ruleset(kCollisionRules);
  Trace tr = crash_at(12);
  const auto a = evaluate_rules(rs, tr, concrete(), scenario(false));
  const auto b = evaluate_rules(rs, tr, concrete(), scenario(false));
  EXPECT_EQ(a, b);
}

TEST(SeverityFromDeltaV, DefaultBins) {
  EXPECT_EQ(severity_from_delta_v(0.0), Severity::S0);
  EXPECT_EQ(severity_from_delta_v(0.999), Severity::S0);
  EXPECT_EQ(severity_from_delta_v(1.0), Severity::S1);
  EXPECT_EQ(severity_from_delta_v(5.0), Severity::S2);
  EXPECT_EQ(severity_from_delta_v(11.0), Severity::S3);
  EXPECT_EQ(severity_from_delta_v(30.0), Severity::S3);
  EXPECT_THROW(severity_from_delta_v(-0.1), std::domain_error);
  EXPECT_EQ(severity_from_delta_v(5.0, DeltaVBins{2, 6, 20}), Severity::S1);
}
