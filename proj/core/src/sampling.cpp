#include "adsv/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "adsv/error.hpp"
#include "json_util.hpp"

namespace adsv {

using detail::json;
using detail::ObjectReader;

std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double unit_deviate(std::uint64_t seed, std::uint64_t index, std::string_view name) {
  std::uint64_t x = mix64(seed ^ mix64(index));
  x = mix64(x ^ hash_name(name));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_quantile: p outside [0, 1]");
  }
  // Acklam's rational approximation (relative error < 1.15e-9) followed by
  // one Halley step against erfc.
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Refine in whichever tail keeps the residual free of cancellation.
  const double e = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace {

double sample_trunc_normal(const TruncNormal& n, double u) {
  const double a = (n.lo - n.mean) / n.sd;
  const double b = (n.hi - n.mean) / n.sd;
  double z;
  if (a >= 0.0) {
    // Entirely in the upper tail: work with survival probabilities.
    const double sa = normal_sf(a);
    const double sb = normal_sf(b);
    z = -normal_quantile(sa - u * (sa - sb));
  } else {
    const double fa = normal_cdf(a);
    const double fb = normal_cdf(b);
    z = normal_quantile(fa + u * (fb - fa));
  }
  z = std::clamp(z, a, b);
  return std::clamp(n.mean + n.sd * z, n.lo, n.hi);
}

}  // namespace

double sample_value(const Distribution& d, double u) {
  if (const auto* uni = std::get_if<Uniform>(&d)) {
    return std::min(uni->lo + u * (uni->hi - uni->lo), uni->hi);
  }
  if (const auto* tn = std::get_if<TruncNormal>(&d)) return sample_trunc_normal(*tn, u);
  const auto& outcomes = std::get<Discrete>(d).outcomes;
  double cum = 0.0;
  for (const auto& [value, prob] : outcomes) {
    cum += prob;
    if (u < cum) return value;
  }
  return outcomes.back().first;
}

std::vector<ConcreteScenario> sample_concrete(const LogicalScenario& ls, std::uint64_t seed,
                                              std::size_t count) {
  if (count == 0) throw std::invalid_argument("sample_concrete: count must be positive");
  std::vector<ConcreteScenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ConcreteScenario cs;
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "-%06zu", i);
    cs.id = ls.id + suffix;
    cs.logical_id = ls.id;
    cs.seed = mix64(seed ^ mix64(i));
    for (const auto& p : ls.parameters) {
      cs.assignments[p.name] = sample_value(p.distribution, unit_deviate(seed, i, p.name));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

std::map<std::string, std::uint64_t> apportion(const std::map<std::string, double>& weights,
                                               std::uint64_t total, std::uint64_t floor) {
  std::map<std::string, std::uint64_t> out;
  if (weights.empty()) {
    if (total != 0) throw InfeasibleBudget("no scenarios to allocate a budget to");
    return out;
  }
  for (const auto& [id, w] : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("apportion: weight of '" + id + "' must be positive");
  }
  if (floor > 0 && total / floor < weights.size()) {
    throw InfeasibleBudget("budget " + std::to_string(total) + " cannot give " +
                           std::to_string(weights.size()) + " scenarios a floor of " +
                           std::to_string(floor));
  }

  // Shares below the floor are pinned to it and the rest re-split, until
  // every remaining share clears the floor.
  std::map<std::string, double> active = weights;
  std::uint64_t remaining = total;
  for (;;) {
    double wsum = 0.0;
    for (const auto& [id, w] : active) wsum += w;
    std::vector<std::string> pinned;
    for (const auto& [id, w] : active) {
      if (static_cast<double>(remaining) * w / wsum < static_cast<double>(floor)) pinned.push_back(id);
    }
    if (pinned.empty()) break;
    for (const auto& id : pinned) {
      out[id] = floor;
      active.erase(id);
      remaining -= floor;
    }
  }

  double wsum = 0.0;
  for (const auto& [id, w] : active) wsum += w;
  struct Share {
    const std::string* id;
    double frac;
  };
  std::vector<Share> shares;
  std::uint64_t assigned = 0;
  for (const auto& [id, w] : active) {
    const double q = static_cast<double>(remaining) * w / wsum;
    const double whole = std::floor(q);
    out[id] = static_cast<std::uint64_t>(whole);
    assigned += static_cast<std::uint64_t>(whole);
    shares.push_back({&id, q - whole});
  }
  std::stable_sort(shares.begin(), shares.end(),
                   [](const Share& a, const Share& b) { return a.frac > b.frac; });
  // `active` iterates in id order, so the stable sort breaks ties by id.
  for (std::size_t i = 0; assigned < remaining; ++i, ++assigned) {
    ++out[*shares[i % shares.size()].id];
  }
  return out;
}

BudgetPlan allocate_budget(const Catalogue& c, std::uint64_t total, std::uint64_t floor) {
  if (total == 0) throw InfeasibleBudget("total budget must be positive");
  std::map<std::string, double> weights;
  for (const auto& f : c.functional) weights[f.id] = f.demand_prior;
  BudgetPlan plan;
  plan.total = total;
  plan.floor_per_functional = floor;
  plan.allocations = apportion(weights, total, floor);
  return plan;
}

std::uint64_t logical_seed(std::uint64_t campaign_seed, std::string_view logical_id) noexcept {
  return mix64(campaign_seed ^ hash_name(logical_id));
}

std::vector<ConcreteScenario> sample_campaign(const Catalogue& c, const BudgetPlan& plan,
                                              std::uint64_t seed) {
  std::vector<ConcreteScenario> out;
  for (const auto& [fid, budget] : plan.allocations) {
    if (budget == 0) continue;
    const auto logicals = c.logical_of(fid);
    if (logicals.empty()) {
      throw DataError("functional[" + fid + "]: budget allocated but no logical scenarios");
    }
    std::map<std::string, double> equal;
    for (const auto* l : logicals) equal[l->id] = 1.0;
    const auto split = apportion(equal, budget, 0);
    for (const auto* l : logicals) {
      const auto n = split.at(l->id);
      if (n == 0) continue;
      auto runs = sample_concrete(*l, logical_seed(seed, l->id), n);
      out.insert(out.end(), std::make_move_iterator(runs.begin()),
                 std::make_move_iterator(runs.end()));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ConcreteScenario& a, const ConcreteScenario& b) { return a.id < b.id; });
  return out;
}

std::string serialize_budget(const BudgetPlan& plan) {
  json j = json::object();
  j["version"] = 1;
  j["total"] = plan.total;
  j["floor_per_functional"] = plan.floor_per_functional;
  json a = json::object();
  for (const auto& [k, v] : plan.allocations) a[k] = v;
  j["allocations"] = std::move(a);
  return j.dump(2) + "\n";
}

BudgetPlan parse_budget(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "budget.json");
  ObjectReader r(doc, "budget");
  if (r.unsigned_integer("version") != 1) r.fail("version", "unsupported version");
  BudgetPlan plan;
  plan.total = r.unsigned_integer("total");
  plan.floor_per_functional = r.unsigned_integer("floor_per_functional");
  const json& a = r.object("allocations");
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (!it->is_number_unsigned()) r.fail("allocations." + it.key(), "expected an integer");
    plan.allocations[it.key()] = it->get<std::uint64_t>();
  }
  std::uint64_t sum = 0;
  for (const auto& [id, n] : plan.allocations) sum += n;
  if (sum != plan.total) r.fail("allocations", "allocations do not sum to total");
  r.finish();
  return plan;
}

}  // namespace adsv
