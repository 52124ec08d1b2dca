#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "adsv/catalogue.hpp"
#include "adsv/scenario.hpp"

namespace adsv {

/// Counter-based deviate in [0, 1): a pure function of
/// (seed, index, parameter name) through a fixed 64-bit mixer.
double unit_deviate(std::uint64_t seed, std::uint64_t index, std::string_view name);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;
/// FNV-1a over the bytes of `s`.
std::uint64_t hash_name(std::string_view s) noexcept;

/// Standard normal CDF.
double normal_cdf(double x);
/// Upper tail 1 - normal_cdf(x) without cancellation.
double normal_sf(double x);
/// Inverse standard normal CDF, accurate to ~1e-15 relative on (0, 1).
double normal_quantile(double p);

/// Maps a unit deviate through the inverse CDF of `d`.
double sample_value(const Distribution& d, double u);

/// `count` concrete scenarios for `ls`. Scenario i depends only on
/// (seed, i, parameter names), so any prefix is stable.
std::vector<ConcreteScenario> sample_concrete(const LogicalScenario& ls, std::uint64_t seed,
                                              std::size_t count);

struct BudgetPlan {
  std::uint64_t total = 0;
  std::uint64_t floor_per_functional = 0;
  std::map<std::string, std::uint64_t> allocations;

  bool operator==(const BudgetPlan&) const = default;
};

/// Splits `total` runs across functional scenarios in proportion to
/// demand_prior, raising any share below `floor` to the floor and
/// re-splitting the rest. Leftover units go to the largest fractional
/// parts, ties broken by id. Throws InfeasibleBudget when
/// total < floor * |functional|.
BudgetPlan allocate_budget(const Catalogue& c, std::uint64_t total, std::uint64_t floor);

/// Same policy over explicit weights (id -> positive weight).
std::map<std::string, std::uint64_t> apportion(const std::map<std::string, double>& weights,
                                               std::uint64_t total, std::uint64_t floor);

/// Samples every budgeted run: each functional allocation is split evenly
/// across its logical scenarios (largest remainder), and each logical
/// scenario draws from its own stream derived from `seed` and its id.
/// Output is sorted by concrete id.
std::vector<ConcreteScenario> sample_campaign(const Catalogue& c, const BudgetPlan& plan,
                                              std::uint64_t seed);

/// Stream seed for one logical scenario within a campaign.
std::uint64_t logical_seed(std::uint64_t campaign_seed, std::string_view logical_id) noexcept;

std::string serialize_budget(const BudgetPlan& plan);
BudgetPlan parse_budget(std::string_view json_text);

}  // namespace adsv
