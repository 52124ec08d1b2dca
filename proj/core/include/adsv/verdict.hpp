#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsv/catalogue.hpp"
#include "adsv/outcome.hpp"
#include "adsv/risk.hpp"
#include "adsv/trace.hpp"

namespace adsv {

enum class Overall { Pass, Fail, Inconclusive };

std::string_view to_string(Overall o) noexcept;
std::optional<Overall> overall_from_string(std::string_view s) noexcept;

struct RunRecord {
  std::string concrete_id;
  std::string functional_id;
  RunOutcome outcome;

  bool operator==(const RunRecord&) const = default;
};

struct CampaignResult {
  /// Sorted by concrete id.
  std::vector<RunRecord> per_run;
  /// Decisions per functional scenario, S0..S3.
  std::map<std::string, std::vector<LevelDecision>> per_functional;
  /// (concrete id, violated rule names), sorted by concrete id.
  std::vector<std::pair<std::string, std::vector<std::string>>> prescriptive_failures;
  DecisionPolicy decision_policy = DecisionPolicy::Permissive;
  Overall overall = Overall::Inconclusive;

  bool operator==(const CampaignResult&) const = default;
};

/// Run count and cumulative severity counts for one functional scenario.
struct FunctionalTally {
  std::uint64_t n_tests = 0;
  SeverityCounts counts;
};

/// Overall status from the prescriptive failures and the decision matrix.
Overall overall_status(bool any_prescriptive_failure,
                       const std::map<std::string, std::vector<LevelDecision>>& per_functional,
                       DecisionPolicy policy);

/// Decides every functional scenario of `functional` from its tally
/// (missing tallies count as zero runs).
std::map<std::string, std::vector<LevelDecision>> decide_all(
    std::span<const FunctionalScenario> functional,
    const std::map<std::string, FunctionalTally>& tallies, const RiskPolicy& policy);

/// Aggregates scored runs into a result. Prescriptive failures are
/// partitioned out before counting; risk statistics are still computed.
CampaignResult aggregate_runs(std::span<const FunctionalScenario> functional,
                              std::vector<RunRecord> runs, const RiskPolicy& policy);

/// Produces the trace for one concrete scenario (simulate or load).
using TraceProvider = std::function<Trace(const ConcreteScenario&, const LogicalScenario&)>;

struct CampaignOptions {
  /// Worker threads; 0 means hardware concurrency.
  unsigned jobs = 0;
};

/// Scores every concrete run with its logical scenario's ruleset and
/// aggregates. Rulesets are resolved before any run is evaluated.
CampaignResult evaluate_campaign(const Catalogue& catalogue,
                                 std::span<const ConcreteScenario> concretes,
                                 const TraceProvider& traces, const RiskPolicy& policy,
                                 const CampaignOptions& options = {});

/// Deterministic report text: sorted keys, ids in order, two-space indent.
std::string report_json(const CampaignResult& r);
CampaignResult parse_report(std::string_view json_text);
/// Writes report_json(r); throws Error on I/O failure.
void write_report(const CampaignResult& r, const std::string& path);

}  // namespace adsv
