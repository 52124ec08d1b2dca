#include "adsv/risk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adsv/error.hpp"
#include "json_util.hpp"

namespace adsv {

using detail::json;
using detail::ObjectReader;

// ---------------------------------------------------------------------------
// Policy
// ---------------------------------------------------------------------------

void RiskPolicy::validate() const {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw DataError("significance must lie in (0, 1)");
  }
  const double* previous = nullptr;
  Severity previous_level = Severity::None;
  for (const auto& [level, lambda] : lambda_per_hour) {
    if (level == Severity::None) throw DataError("lambda cannot be set for SNONE");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw DataError("lambda for " + std::string(to_string(level)) + " must be positive");
    }
    if (previous && lambda > *previous) {
      throw DataError("lambda must not increase with severity (" +
                      std::string(to_string(previous_level)) + " < " +
                      std::string(to_string(level)) + ")");
    }
    previous = &lambda;
    previous_level = level;
  }
}

RiskPolicy parse_policy(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "policy.json");
  ObjectReader r(doc, "policy");
  if (r.unsigned_integer("version") != 1) r.fail("version", "unsupported version");
  RiskPolicy p;
  if (r.has("significance")) p.significance = r.number("significance");
  if (r.has("decision_policy")) {
    const std::string dp = r.string("decision_policy");
    if (dp == "permissive") {
      p.decision_policy = DecisionPolicy::Permissive;
    } else if (dp == "strict") {
      p.decision_policy = DecisionPolicy::Strict;
    } else {
      r.fail("decision_policy", "expected 'permissive' or 'strict'");
    }
  }
  const json& lambdas = r.object("lambda_per_hour");
  for (auto it = lambdas.begin(); it != lambdas.end(); ++it) {
    auto level = severity_from_string(it.key());
    if (!level || *level == Severity::None) {
      r.fail("lambda_per_hour." + it.key(), "expected a level S0..S3");
    }
    if (!it->is_number()) r.fail("lambda_per_hour." + it.key(), "expected a number");
    p.lambda_per_hour[*level] = it->get<double>();
  }
  r.finish();
  p.validate();
  return p;
}

RiskPolicy read_policy_file(const std::string& path) {
  try {
    return parse_policy(detail::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string serialize_policy(const RiskPolicy& p) {
  json j = json::object();
  j["version"] = 1;
  j["significance"] = p.significance;
  j["decision_policy"] = p.decision_policy == DecisionPolicy::Permissive ? "permissive" : "strict";
  json l = json::object();
  for (const auto& [level, lambda] : p.lambda_per_hour) l[std::string(to_string(level))] = lambda;
  j["lambda_per_hour"] = std::move(l);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Tolerability
// ---------------------------------------------------------------------------

double acceptable_rate(double lambda_per_hour, const Exposure& exposure) {
  if (!(lambda_per_hour > 0.0)) throw std::domain_error("acceptable_rate: lambda must be positive");
  if (!(exposure.value > 0.0)) throw std::domain_error("acceptable_rate: exposure must be positive");
  if (exposure.kind == Exposure::Kind::RatePerHour) return lambda_per_hour / exposure.value;
  if (!exposure.mean_duration_hours || !(*exposure.mean_duration_hours > 0.0)) {
    throw std::domain_error("acceptable_rate: time_proportion exposure needs a mean duration");
  }
  // A proportion q of driving time in occurrences of mean duration d is
  // q / d occurrences per hour.
  return lambda_per_hour * *exposure.mean_duration_hours / exposure.value;
}

void SeverityCounts::add(Severity s) {
  for (Severity level : kScoredLevels) {
    if (s >= level) ++at_least[ordinal(level)];
  }
}

SeverityCounts cumulative_counts(std::span<const RunOutcome> outcomes) {
  SeverityCounts counts;
  for (const auto& o : outcomes) {
    const auto* scored = std::get_if<Scored>(&o);
    if (!scored) throw std::invalid_argument("cumulative_counts: prescriptive failure in outcomes");
    counts.add(scored->severity);
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Binomial tails
// ---------------------------------------------------------------------------

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;  // log(sqrt(2*pi))
constexpr double kLn2Pi = 1.837877066409345483560659472811;

// log(n!) - log(sqrt(2*pi*n) * (n/e)^n) for integer n >= 1.
double stirlerr(double n) {
  constexpr double S0 = 1.0 / 12;
  constexpr double S1 = 1.0 / 360;
  constexpr double S2 = 1.0 / 1260;
  constexpr double S3 = 1.0 / 1680;
  constexpr double S4 = 1.0 / 1188;
  if (n <= 15.0) return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLnSqrt2Pi;
  const double nn = n * n;
  if (n > 500) return (S0 - S1 / nn) / n;
  if (n > 80) return (S0 - (S1 - S2 / nn) / nn) / n;
  if (n > 35) return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
  return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x*log(x/m) + m - x, stable when x is close to m.
double bd0(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    const double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

// Sum of pmf terms from k upward; assumes k lies above the mean so terms
// decrease.
double upper_sum(std::uint64_t n, std::uint64_t k, double p) {
  const double ratio = p / (1.0 - p);
  double term = std::exp(binomial_log_pmf(n, k, p));
  double sum = term;
  for (std::uint64_t j = k; j < n && term > 0.0; ++j) {
    term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * ratio;
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

// Sum of pmf terms from k downward; assumes k lies below the mean.
double lower_sum(std::uint64_t n, std::uint64_t k, double p) {
  const double ratio = (1.0 - p) / p;
  double term = std::exp(binomial_log_pmf(n, k, p));
  double sum = term;
  for (std::uint64_t j = k; j > 0 && term > 0.0; --j) {
    term *= static_cast<double>(j) / static_cast<double>(n - j + 1) * ratio;
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

void check_args(std::uint64_t n, std::uint64_t k, double p) {
  if (k > n) throw std::domain_error("binomial: k exceeds n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial: p outside [0, 1]");
}

}  // namespace

double binomial_log_pmf(std::uint64_t n, std::uint64_t k, double p) {
  check_args(n, k, p);
  const double q = 1.0 - p;
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (q == 0.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double x = static_cast<double>(k);
  if (k == 0) return nd * std::log1p(-p);
  if (k == n) return nd * std::log(p);
  const double lc = stirlerr(nd) - stirlerr(x) - stirlerr(nd - x) - bd0(x, nd * p) -
                    bd0(nd - x, nd * q);
  const double lf = kLn2Pi + std::log(x) + std::log1p(-x / nd);
  return lc - 0.5 * lf;
}

double binomial_tail_geq(std::uint64_t n, std::uint64_t k, double p) {
  check_args(n, k, p);
  if (k == 0) return 1.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double mean = static_cast<double>(n) * p;
  if (static_cast<double>(k) > mean) return std::min(1.0, upper_sum(n, k, p));
  return std::clamp(1.0 - lower_sum(n, k - 1, p), 0.0, 1.0);
}

double binomial_tail_leq(std::uint64_t n, std::uint64_t k, double p) {
  check_args(n, k, p);
  if (k == n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  const double mean = static_cast<double>(n) * p;
  if (static_cast<double>(k) < mean) return std::min(1.0, lower_sum(n, k, p));
  return std::clamp(1.0 - upper_sum(n, k + 1, p), 0.0, 1.0);
}

double rate_upper_bound(std::uint64_t n, std::uint64_t k, double confidence) {
  if (k > n) throw std::domain_error("rate_upper_bound: k exceeds n");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::domain_error("rate_upper_bound: confidence outside (0, 1)");
  }
  if (k == n) return 1.0;
  const double target = 1.0 - confidence;
  double lo = 0.0;
  double hi = 1.0;
  // P(X <= k) falls monotonically in p; keep hi on the <= target side.
  for (int i = 0; i < 2000 && hi - lo > 1e-12 * hi && hi - lo > 1e-300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_tail_leq(n, k, mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

std::string_view to_string(LevelStatus s) noexcept {
  switch (s) {
    case LevelStatus::ProvenSafe: return "PROVEN_SAFE";
    case LevelStatus::ProvenUnsafe: return "PROVEN_UNSAFE";
    case LevelStatus::Inconclusive: return "INCONCLUSIVE";
    case LevelStatus::NotApplicable: return "NOT_APPLICABLE";
  }
  return "NOT_APPLICABLE";
}

std::optional<LevelStatus> level_status_from_string(std::string_view s) noexcept {
  if (s == "PROVEN_SAFE") return LevelStatus::ProvenSafe;
  if (s == "PROVEN_UNSAFE") return LevelStatus::ProvenUnsafe;
  if (s == "INCONCLUSIVE") return LevelStatus::Inconclusive;
  if (s == "NOT_APPLICABLE") return LevelStatus::NotApplicable;
  return std::nullopt;
}

std::vector<LevelDecision> decide_functional(const SeverityCounts& counts, std::uint64_t n_tests,
                                             const FunctionalScenario& fs,
                                             const RiskPolicy& policy) {
  std::vector<LevelDecision> out;
  for (Severity level : kScoredLevels) {
    LevelDecision d;
    d.level = level;
    d.n_tests = n_tests;
    d.k_events = counts[level];
    if (d.k_events > n_tests) throw std::invalid_argument("decide_functional: k exceeds n");
    d.l_actual = n_tests ? static_cast<double>(d.k_events) / static_cast<double>(n_tests) : 0.0;
    d.l_upper = rate_upper_bound(n_tests, d.k_events, 1.0 - policy.significance);

    auto it = policy.lambda_per_hour.find(level);
    if (it == policy.lambda_per_hour.end()) {
      d.status = LevelStatus::NotApplicable;
      out.push_back(d);
      continue;
    }
    const double l_acc = acceptable_rate(it->second, fs.exposure);
    d.l_acceptable = l_acc;
    if (l_acc >= 1.0) {
      d.status = LevelStatus::NotApplicable;
      out.push_back(d);
      continue;
    }
    d.p_value_hb = binomial_tail_geq(n_tests, d.k_events, l_acc);
    d.p_value_ha = binomial_tail_leq(n_tests, d.k_events, l_acc);
    if (*d.p_value_hb < policy.significance) {
      d.status = LevelStatus::ProvenUnsafe;
    } else if (*d.p_value_ha < policy.significance) {
      d.status = LevelStatus::ProvenSafe;
    } else {
      d.status = LevelStatus::Inconclusive;
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace adsv
