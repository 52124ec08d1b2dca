#include <gtest/gtest.h>

#include <filesystem>

#include "adsv/catalogue.hpp"
#include "adsv/error.hpp"
#include "adsv/severity.hpp"
#include "helpers.hpp"

using namespace adsv;
using testing_support::fixture;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace fs = std::filesystem;

namespace {

// Copies the small fixture into a temp dir with one textual substitution in
// catalogue.json, so each malformed variant differs from a valid file in
// exactly one place.
std::string load_error(const TempDir& dir, const std::string& from, const std::string& to) {
  fs::copy(fixture("catalogue_small"), dir.path(), fs::copy_options::overwrite_existing | fs::copy_options::recursive);
  std::string doc = slurp(fixture("catalogue_small/catalogue.json"));
  const auto at = doc.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  doc.replace(at, from.size(), to);
  spit(dir.path() / "catalogue.json", doc);
  try {
    load_catalogue(dir.path());
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

std::vector<Issue> errors_only(const std::vector<Issue>& issues) {
  std::vector<Issue> out;
  for (const auto& i : issues) {
    if (i.level == Issue::Level::Error) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(Severity, Strings) {
  EXPECT_EQ(to_string(Severity::None), "SNONE");
  EXPECT_EQ(to_string(Severity::S2), "S2");
  EXPECT_EQ(severity_from_string("S3"), Severity::S3);
  EXPECT_EQ(severity_from_string("SNONE"), Severity::None);
  EXPECT_FALSE(severity_from_string("S4"));
  EXPECT_LT(Severity::None, Severity::S0);
  EXPECT_LT(Severity::S2, Severity::S3);
}

TEST(LoadCatalogue, SmallFixture) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  EXPECT_EQ(c.functional.size(), 2u);
  EXPECT_EQ(c.logical.size(), 3u);
  EXPECT_EQ(c.rulesets.size(), 2u);
  ASSERT_NE(c.find_functional("merge"), nullptr);
  EXPECT_EQ(c.find_functional("merge")->exposure.kind, Exposure::Kind::TimeProportion);
  EXPECT_EQ(c.find_functional("nope"), nullptr);
  const auto* lb = c.find_logical("follow_brake");
  ASSERT_NE(lb, nullptr);
  EXPECT_EQ(std::get<Discrete>(lb->parameters[1].distribution).outcomes.size(), 2u);
  EXPECT_NE(c.ruleset_for(*lb), nullptr);
  auto follow = c.logical_of("follow");
  ASSERT_EQ(follow.size(), 2u);
  EXPECT_EQ(follow[0]->id, "follow_brake");
  EXPECT_EQ(follow[1]->id, "follow_cruise");
}

TEST(LoadCatalogue, CampaignFixtureIsValid) {
  Catalogue c = load_catalogue(fixture("catalogue"));
  EXPECT_EQ(c.functional.size(), 3u);
  EXPECT_TRUE(errors_only(validate_catalogue(c)).empty());
}

TEST(ValidateCatalogue, ValidFixtureHasNoIssues) {
  EXPECT_TRUE(validate_catalogue(load_catalogue(fixture("catalogue_small"))).empty());
}

TEST(LoadCatalogue, DuplicateFunctionalId) {
  TempDir dir("cat_dup");
  auto msg = load_error(dir, "\"id\": \"merge\"", "\"id\": \"follow\"");
  EXPECT_NE(msg.find("duplicate functional id 'follow'"), std::string::npos) << msg;
}

TEST(LoadCatalogue, DiscreteProbabilitiesMustSumToOne) {
  TempDir dir("cat_sum");
  auto msg = load_error(dir, "{\"value\": 4.0, \"probability\": 0.5}",
                        "{\"value\": 4.0, \"probability\": 0.4}");
  EXPECT_NE(msg.find("probabilities must sum to 1"), std::string::npos) << msg;
}

TEST(LoadCatalogue, StructuralErrors) {
  TempDir dir("cat_struct");
  EXPECT_NE(load_error(dir, "\"demand_prior\": 3.0", "\"demand_prior\": 3.0, \"colour\": 1")
                .find("unknown field"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"functional_id\": \"merge\"", "\"functional_id\": \"merger\"")
                .find("does not resolve"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"ruleset_ref\": \"speed.rules\"", "\"ruleset_ref\": \"gone.rules\"")
                .find("missing ruleset file"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"kind\": \"uniform\", \"lo\": 5.0", "\"kind\": \"beta\", \"lo\": 5.0")
                .find("beta"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"initial_gap\": 30.0,", "").find("missing input 'initial_gap'"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"cut_in_gap\": \"gap\"", "\"cut_in_gap\": \"gapp\"")
                .find("unknown parameter 'gapp'"),
            std::string::npos);
  EXPECT_NE(load_error(dir, "\"version\": 1", "\"version\": 7").find("version"), std::string::npos);
  EXPECT_NE(load_error(dir, "\"value\": 1.0}", "\"value\": \"often\"}").find("functional[0]"),
            std::string::npos);
}

TEST(LoadCatalogue, RulesetParseErrorNamesFile) {
  TempDir dir("cat_rules");
  fs::copy(fixture("catalogue_small"), dir.path(), fs::copy_options::overwrite_existing | fs::copy_options::recursive);
  spit(dir.path() / "speed.rules", "rule under_limit prescriptive\n  assert always(speed(ego) <= )\n");
  try {
    load_catalogue(dir.path());
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("speed.rules:2:"), std::string::npos) << msg;
  }
}

TEST(LoadCatalogue, RulesetParameterMustExist) {
  TempDir dir("cat_rparam");
  fs::copy(fixture("catalogue_small"), dir.path(), fs::copy_options::overwrite_existing | fs::copy_options::recursive);
  spit(dir.path() / "speed.rules", "rule r prescriptive assert always(speed(ego) <= param(\"vmax\"))\n");
  try {
    load_catalogue(dir.path());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("vmax"), std::string::npos) << e.what();
  }
}

TEST(LoadCatalogue, MissingDocument) {
  TempDir dir("cat_missing");
  EXPECT_THROW(load_catalogue(dir.path()), DataError);
}

TEST(ValidateCatalogue, ExposureChecks) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  c.functional[0].exposure.value = 0.0;
  auto issues = errors_only(validate_catalogue(c));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].message, "exposure must be positive");
  EXPECT_NE(issues[0].location.find("follow"), std::string::npos);

  Catalogue d = load_catalogue(fixture("catalogue_small"));
  d.functional[1].exposure.mean_duration_hours.reset();
  auto issues2 = errors_only(validate_catalogue(d));
  ASSERT_EQ(issues2.size(), 1u);
  EXPECT_EQ(issues2[0].message, "time_proportion exposure requires mean_duration_hours");
}

TEST(ValidateCatalogue, Warnings) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  FunctionalScenario lonely = c.functional[0];
  lonely.id = "lonely";
  c.functional.push_back(lonely);
  auto issues = validate_catalogue(c);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].level, Issue::Level::Warning);
}

TEST(SerializeCatalogue, RoundTrip) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  Catalogue back = parse_catalogue_document(serialize_catalogue(c));
  back.rulesets = c.rulesets;
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_catalogue(back), serialize_catalogue(c));
}

TEST(LoadCatalogue, PureForSameBytes) {
  EXPECT_EQ(load_catalogue(fixture("catalogue_small")), load_catalogue(fixture("catalogue_small")));
}

TEST(Concrete, RoundTripAndValidation) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  const LogicalScenario& ls = *c.find_logical("follow_brake");
  ConcreteScenario cs{"follow_brake-000003", "follow_brake", 99, {{"v", 12.5}, {"decel", 4.0}}};
  EXPECT_EQ(parse_concrete(serialize_concrete(cs)), cs);
  EXPECT_TRUE(validate_concrete(ls, cs).empty());

  ConcreteScenario bad = cs;
  bad.assignments["v"] = 25.0;
  bad.assignments["w"] = 1.0;
  bad.assignments.erase("decel");
  EXPECT_EQ(validate_concrete(ls, bad).size(), 3u);
  EXPECT_THROW(parse_concrete("{\"id\":\"x\"}"), DataError);
}

TEST(Scene, ResolveInputs) {
  Catalogue c = load_catalogue(fixture("catalogue_small"));
  ConcreteScenario cs{"follow_brake-000000", "follow_brake", 1, {{"v", 12.5}, {"decel", 2.0}}};
  auto scene = resolve_scene(*c.find_logical("follow_brake"), cs);
  EXPECT_EQ(scene.at("ego_speed"), 12.5);
  EXPECT_EQ(scene.at("lead_speed"), 12.5);
  EXPECT_EQ(scene.at("initial_gap"), 30.0);
  EXPECT_EQ(scene.at("lead_decel"), 2.0);
  EXPECT_EQ(scene.at("brake_time"), 1.0);
}
