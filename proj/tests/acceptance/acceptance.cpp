// One line per acceptance criterion: PASS or FAIL, the criterion number, a
// short description and the measured values. Exit status is nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "adsv/catalogue.hpp"
#include "adsv/risk.hpp"
#include "adsv/rules.hpp"
#include "adsv/sampling.hpp"
#include "adsv/verdict.hpp"
#include "commands.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace adsv;
namespace fs = std::filesystem;
using testing_support::fixture;
using testing_support::slurp;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int number, const std::string& title, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.ok) ++failures;
  std::printf("%s %2d  %s:%s (%.3f s)\n", c.ok ? "PASS" : "FAIL", number, title.c_str(),
              c.detail.str().c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FunctionalScenario rate_scenario(double rate) {
  FunctionalScenario fs;
  fs.id = "F";
  fs.exposure = {Exposure::Kind::RatePerHour, rate, {}};
  return fs;
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = adsv::cli::run(args, out, err);
  if (code != 0 && code != 2 && code != 3) std::cerr << err.str();
  return code;
}

std::string join_dir(const fs::path& dir) {
  std::string all;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + slurp(f);
  return all;
}

}  // namespace

int main() {
  criterion(1, "H_a worked example, P(X <= 0 | n=1e7, p=1e-7)", [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const double p = binomial_tail_leq(10'000'000, 0, 1e-7);
    const double secs = seconds_since(t0);
    c.detail << " P=" << p << " (quoted 0.37)";
    c.require(std::abs(p - 0.3679) <= 0.005, "0.3679 +- 0.005");
    c.require(secs < 1.0, "runtime < 1 s");
  });

  criterion(2, "H_b worked example at k=2: point mass vs one-sided tail", [](Check& c) {
    const double point = static_cast<double>(oracle::poisson_pmf(2, 1.0L));
    const double binom_point = std::exp(binomial_log_pmf(10'000'000, 2, 1e-7));
    const double tail = binomial_tail_geq(10'000'000, 2, 1e-7);
    const double tail_oracle = 1.0 - 2.0 * std::exp(-1.0);
    c.detail << " Poisson P(X=2)=" << point << " binomial P(X=2)=" << binom_point
             << " P(X>=2)=" << tail << " oracle 1-2/e=" << tail_oracle;
    c.require(std::abs(point - 0.1839) <= 0.001, "point mass 0.1839 +- 0.001");
    c.require(std::abs(binom_point - 0.1839) <= 0.001, "binomial point mass 0.1839 +- 0.001");
    c.require(std::abs(tail - 0.2642) <= 0.001, "tail 0.2642 +- 0.001");
    c.require(std::abs(tail - tail_oracle) <= 1e-6, "tail matches Poisson oracle");
    const std::string readme = slurp(fs::path(ADSV_SOURCE_DIR) / "README.md");
    c.require(readme.find("0.1839") != std::string::npos && readme.find("0.2642") != std::string::npos,
              "README documents both readings");
  });

  criterion(3, "Decisions for k = 0..4 at l_acc=1e-7, n=1e7, alpha=0.05", [](Check& c) {
    RiskPolicy policy;
    policy.lambda_per_hour[Severity::S3] = 1e-7;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t k = 0; k <= 4; ++k) {
      SeverityCounts counts;
      counts.at_least = {k, k, k, k};
      const auto d = decide_functional(counts, 10'000'000, rate_scenario(1.0), policy)[3];
      c.detail << " k=" << k << ":" << to_string(d.status);
      const auto want = k < 4 ? LevelStatus::Inconclusive : LevelStatus::ProvenUnsafe;
      c.require(d.status == want, "k=" + std::to_string(k) + " status");
    }
    c.require(seconds_since(t0) < 1.0, "runtime < 1 s");
  });

  criterion(4, "Zero-event safety proof needs between 1e7 and 3e7 tests", [](Check& c) {
    const double at_3e7 = binomial_tail_leq(30'000'000, 0, 1e-7);
    const double at_1e7 = binomial_tail_leq(10'000'000, 0, 1e-7);
    c.detail << " P(n=3e7)=" << at_3e7 << " (e^-3=" << std::exp(-3.0) << ") P(n=1e7)=" << at_1e7;
    c.require(at_3e7 < 0.05, "n=3e7 below alpha");
    c.require(at_1e7 > 0.05, "n=1e7 above alpha");
  });

  criterion(5, "Acceptable-rate scale invariance and proportion form", [](Check& c) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lg(-9.0, 2.0);
    double worst = 0.0, worst_prop = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double lambda = std::pow(10.0, lg(rng));
      const double e = std::pow(10.0, lg(rng));
      const double s = std::pow(10.0, lg(rng));
      const double base = acceptable_rate(lambda, {Exposure::Kind::RatePerHour, e, {}});
      const double scaled = acceptable_rate(s * lambda, {Exposure::Kind::RatePerHour, s * e, {}});
      worst = std::max(worst, std::abs(scaled - base) / base);

      const double d = std::pow(10.0, lg(rng) / 3.0);
      const double q = e * d;
      const double prop = acceptable_rate(lambda, {Exposure::Kind::TimeProportion, q, d});
      worst_prop = std::max(worst_prop, std::abs(prop - base) / base);
    }
    c.detail << " max rel diff scale=" << worst << " proportion=" << worst_prop;
    c.require(worst <= 1e-12, "scale invariance");
    c.require(worst_prop <= 1e-12, "proportion form q = e*d");
  });

  criterion(6, "Exact tails vs Poisson oracle within n p^2; complementarity", [](Check& c) {
    double worst_ratio = 0.0, worst_comp = 0.0;
    for (std::uint64_t n : {1'000ull, 10'000ull, 100'000ull, 1'000'000ull, 10'000'000ull}) {
      for (double np : {0.1, 0.3, 1.0, 3.0, 10.0}) {
        const double p = np / static_cast<double>(n);
        for (std::uint64_t k = 0; k <= 40; ++k) {
          const double exact = binomial_tail_geq(n, k, p);
          const double pois = static_cast<double>(oracle::poisson_tail_geq(k, np));
          worst_ratio = std::max(worst_ratio, std::abs(exact - pois) / (static_cast<double>(n) * p * p));
          if (k >= 1) {
            worst_comp = std::max(worst_comp, std::abs(exact + binomial_tail_leq(n, k - 1, p) - 1.0));
          }
        }
      }
    }
    c.detail << " max |diff|/(n p^2)=" << worst_ratio << " max complement error=" << worst_comp;
    c.require(worst_ratio <= 1.0, "Le Cam bound");
    c.require(worst_comp <= 1e-10, "complementarity");
  });

  criterion(7, "Anti-gaming over 1000 randomized campaigns", [](Check& c) {
    std::mt19937_64 rng(7);
    std::vector<FunctionalScenario> fs = {rate_scenario(1.0)};
    fs.push_back(rate_scenario(0.2));
    fs[1].id = "G";
    RiskPolicy policy;
    policy.lambda_per_hour = {{Severity::S0, 0.08}, {Severity::S1, 0.03}, {Severity::S2, 0.01}, {Severity::S3, 0.004}};
    std::size_t unsafe_seen = 0, fail_seen = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::discrete_distribution<int> sev({70, 12, 8, 6, 4});
      const std::size_t n = 20 + rng() % 80;
      std::vector<RunRecord> runs;
      for (std::size_t i = 0; i < n; ++i) {
        runs.push_back({"r" + std::to_string(i), i % 2 ? "F" : "G", Scored{static_cast<Severity>(sev(rng) - 1)}});
      }
      const auto before = aggregate_runs(fs, runs, policy);
      auto& s = std::get<Scored>(runs[rng() % n].outcome).severity;
      const int raised = std::min(3, ordinal(s) + 1 + static_cast<int>(rng() % 3));
      s = static_cast<Severity>(raised);
      const auto after = aggregate_runs(fs, runs, policy);
      for (const auto& [fid, ds] : before.per_functional) {
        for (std::size_t l = 0; l < ds.size(); ++l) {
          if (ds[l].status != LevelStatus::ProvenUnsafe) continue;
          ++unsafe_seen;
          if (after.per_functional.at(fid)[l].status != LevelStatus::ProvenUnsafe) {
            c.require(false, "trial " + std::to_string(trial) + " lost PROVEN_UNSAFE");
          }
        }
      }
      if (before.overall == Overall::Fail) {
        ++fail_seen;
        if (after.overall == Overall::Pass) c.require(false, "trial " + std::to_string(trial) + " FAIL -> PASS");
      }
    }
    c.detail << " PROVEN_UNSAFE cells checked=" << unsafe_seen << " FAIL campaigns checked=" << fail_seen;
    c.require(unsafe_seen > 100 && fail_seen > 100, "enough unsafe cases exercised");
  });

  criterion(8, "End-to-end: 3 functionals, budget 300, IDM vs scripted crash", [](Check& c) {
    testing_support::TempDir a("acc8a"), b("acc8b");
    const std::string cat = fixture("catalogue").string();
    const std::string policy = fixture("policy.json").string();
    for (const auto* d : {&a, &b}) {
      c.require(run_cli({"sample", cat, "--total", "300", "--floor", "20", "--seed", "2024", "--out", d->str()}) == 0,
                "sample");
    }
    c.require(load_catalogue(cat).functional.size() == 3, "three functional scenarios");

    auto timed_run = [&](const testing_support::TempDir& d, const std::string& controller,
                         const std::string& name) {
      const auto t0 = std::chrono::steady_clock::now();
      const int code = run_cli({"run", cat, (d.path() / "concrete").string(), policy, "--sim", "--controller",
                            controller, "--out", (d.path() / name).string()});
      const double secs = seconds_since(t0);
      c.require(secs < 30.0, controller + " under 30 s");
      return code;
    };

    const int good = timed_run(a, "idm_follower", "good.json");
    const int crash = timed_run(a, "scripted_brake", "crash.json");
    timed_run(b, "idm_follower", "good.json");
    timed_run(b, "scripted_brake", "crash.json");

    const auto good_r = parse_report(slurp(a.path() / "good.json"));
    const auto crash_r = parse_report(slurp(a.path() / "crash.json"));
    c.detail << " idm=" << to_string(good_r.overall) << " (failures " << good_r.prescriptive_failures.size()
             << ", exit " << good << ") crash=" << to_string(crash_r.overall) << " (failures "
             << crash_r.prescriptive_failures.size() << ", exit " << crash << ")";
    c.require(good == 0 && good_r.overall == Overall::Pass, "IDM passes");
    c.require(good_r.prescriptive_failures.empty(), "IDM has no prescriptive failures");
    c.require(crash == 2 && crash_r.overall == Overall::Fail, "crash controller fails");
    bool attributed = !crash_r.prescriptive_failures.empty();
    for (const auto& [id, rules] : crash_r.prescriptive_failures) {
      attributed = attributed && rules == std::vector<std::string>{"no_collision"};
    }
    c.require(attributed, "failures attributed to the collision rule");
    c.require(join_dir(a.path()) == join_dir(b.path()), "byte-reproducible");
  });

  criterion(9, "DSL round trip on a 10-rule corpus; temporal identities on 100 traces", [](Check& c) {
    const auto rs = rules::read_ruleset_file(fixture("rules/corpus.rules").string());
    const auto printed = rules::print_ruleset(rs);
    c.require(rs.rules.size() == 10, "corpus has 10 rules");
    c.require(rules::parse_ruleset(printed) == rs, "print then parse is identity");

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng() % 40;
      Trace tr(0.1, {{"speed", {"ego"}}, {"gap", {"ego", "lead"}}});
      for (std::size_t i = 0; i < n; ++i) {
        const double row[] = {u(rng), u(rng)};
        tr.push_row(static_cast<double>(i) * 0.1, row);
      }
      std::ostringstream p;
      p << "speed(ego) > " << u(rng) << " and gap(ego, lead) > " << u(rng) / 4;
      const auto q = rules::parse_ruleset(
          "rule a prescriptive assert always(" + p.str() + ")\n"
          "rule b prescriptive assert not eventually(not (" + p.str() + "))\n"
          "rule c prescriptive assert never(" + p.str() + ")\n"
          "rule d prescriptive assert not eventually(" + p.str() + ")\n");
      rules::Evaluator ev(tr, {}, {});
      const auto h = [&](int i) { return ev.holds(**q.rules[i].assertion); };
      if (h(0) == h(1) && h(2) == h(3)) ++agree;
    }
    c.detail << " identities held on " << agree << "/100 traces";
    c.require(agree == 100, "De Morgan identities");
  });

  criterion(10, "Sampler fidelity (KS, n=10000) and reproducibility", [](Check& c) {
    const std::size_t n = 10'000;
    const double crit = oracle::ks_critical_001(n);
    auto draws = [&](Distribution d, std::uint64_t seed) {
      LogicalScenario ls;
      ls.id = "ks";
      ls.parameters.push_back({"x", d});
      std::vector<double> xs;
      for (const auto& cs : sample_concrete(ls, seed, n)) xs.push_back(cs.assignments.at("x"));
      return xs;
    };
    const Uniform uni{10.0, 20.0};
    const double d_u = oracle::ks_statistic(draws(uni, 1), [&](double x) { return (x - uni.lo) / (uni.hi - uni.lo); });
    const TruncNormal tn{35.0, 5.0, 25.0, 50.0};
    const double za = oracle::std_normal_cdf((tn.lo - tn.mean) / tn.sd);
    const double zb = oracle::std_normal_cdf((tn.hi - tn.mean) / tn.sd);
    const double d_t = oracle::ks_statistic(draws(tn, 2), [&](double x) {
      return (oracle::std_normal_cdf((x - tn.mean) / tn.sd) - za) / (zb - za);
    });
    const Discrete disc{{{1.0, 0.25}, {2.0, 0.5}, {3.0, 0.25}}};
    const auto xs = draws(disc, 3);
    double d_d = 0.0, cdf = 0.0;
    for (const auto& [v, pr] : disc.outcomes) {
      const double below = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x < v; }));
      const double upto = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= v; }));
      d_d = std::max(d_d, std::abs(below / n - cdf));
      cdf += pr;
      d_d = std::max(d_d, std::abs(upto / n - cdf));
    }
    c.detail << " D uniform=" << d_u << " trunc_normal=" << d_t << " discrete=" << d_d << " critical=" << crit;
    c.require(d_u < crit && d_t < crit && d_d < crit, "KS below critical value");
    c.require(draws(tn, 2) == draws(tn, 2), "repeat draws identical");

    testing_support::TempDir a("acc10a"), b("acc10b");
    const std::string cat = fixture("catalogue").string();
    const std::string policy = fixture("policy.json").string();
    for (const auto* d : {&a, &b}) {
      c.require(run_cli({"sample", cat, "--total", "150", "--seed", "77", "--out", d->str()}) == 0, "sample");
    }
    c.require(join_dir(a.path() / "concrete") == join_dir(b.path() / "concrete"), "two sample runs identical");
    run_cli({"run", cat, (a.path() / "concrete").string(), policy, "--sim", "--jobs", "1", "--out",
         (a.path() / "r1.json").string()});
    run_cli({"run", cat, (a.path() / "concrete").string(), policy, "--sim", "--jobs", "8", "--out",
         (a.path() / "r8.json").string()});
    c.require(slurp(a.path() / "r1.json") == slurp(a.path() / "r8.json") && !slurp(a.path() / "r1.json").empty(),
              "--jobs 1 and --jobs 8 reports identical");
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
