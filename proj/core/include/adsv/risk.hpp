#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsv/outcome.hpp"
#include "adsv/scenario.hpp"
#include "adsv/severity.hpp"

namespace adsv {

enum class DecisionPolicy { Permissive, Strict };

/// Regulator-side tolerability inputs.
struct RiskPolicy {
  /// Tolerable events of severity >= level per hour of use. Levels without
  /// an entry carry no requirement.
  std::map<Severity, double> lambda_per_hour;
  double significance = 0.05;
  DecisionPolicy decision_policy = DecisionPolicy::Permissive;

  /// Throws DataError unless lambdas are positive and non-increasing with
  /// severity and significance is in (0, 1).
  void validate() const;

  bool operator==(const RiskPolicy&) const = default;
};

/// UK fatal crash rate per hour driven; the documented default for S3.
inline constexpr double kDefaultLambdaS3 = 1.7e-7;

RiskPolicy parse_policy(std::string_view json_text);
RiskPolicy read_policy_file(const std::string& path);
std::string serialize_policy(const RiskPolicy& p);

/// Tolerable proportion of concrete runs reaching a severity level:
/// lambda / e for an hourly rate, lambda * d / q for a time proportion q
/// with mean occurrence duration d.
double acceptable_rate(double lambda_per_hour, const Exposure& exposure);

/// Runs with severity >= level, per scored level.
struct SeverityCounts {
  std::array<std::uint64_t, 4> at_least{};

  std::uint64_t operator[](Severity level) const { return at_least.at(ordinal(level)); }
  /// Adds one scored run. SNONE touches nothing.
  void add(Severity s);

  bool operator==(const SeverityCounts&) const = default;
};

/// Cumulative counts over scored outcomes. Throws std::invalid_argument
/// if any outcome is a prescriptive failure.
SeverityCounts cumulative_counts(std::span<const RunOutcome> outcomes);

/// log P(X = k) for X ~ Binomial(n, p), via saddle-point deviance terms.
double binomial_log_pmf(std::uint64_t n, std::uint64_t k, double p);
/// P(X >= k) for X ~ Binomial(n, p).
double binomial_tail_geq(std::uint64_t n, std::uint64_t k, double p);
/// P(X <= k) for X ~ Binomial(n, p).
double binomial_tail_leq(std::uint64_t n, std::uint64_t k, double p);

/// One-sided Clopper-Pearson upper bound on the event proportion.
double rate_upper_bound(std::uint64_t n, std::uint64_t k, double confidence);

enum class LevelStatus { ProvenSafe, ProvenUnsafe, Inconclusive, NotApplicable };

std::string_view to_string(LevelStatus s) noexcept;
std::optional<LevelStatus> level_status_from_string(std::string_view s) noexcept;

/// Statistical verdict for one (functional scenario, severity level) cell.
struct LevelDecision {
  Severity level = Severity::S0;
  std::uint64_t n_tests = 0;
  std::uint64_t k_events = 0;
  /// Absent when the policy sets no lambda for this level.
  std::optional<double> l_acceptable;
  /// P(X <= k) under l_acceptable; small values reject "at least as bad as
  /// the limit".
  std::optional<double> p_value_ha;
  /// P(X >= k) under l_acceptable; small values reject "no worse than the
  /// limit".
  std::optional<double> p_value_hb;
  /// k / n.
  double l_actual = 0.0;
  /// Clopper-Pearson upper bound at confidence 1 - significance.
  double l_upper = 1.0;
  LevelStatus status = LevelStatus::NotApplicable;

  bool operator==(const LevelDecision&) const = default;
};

/// Decisions for S0..S3 of one functional scenario.
std::vector<LevelDecision> decide_functional(const SeverityCounts& counts, std::uint64_t n_tests,
                                             const FunctionalScenario& fs,
                                             const RiskPolicy& policy);

}  // namespace adsv
