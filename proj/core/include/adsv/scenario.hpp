#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace adsv {

/// How often a functional scenario occurs in ordinary driving.
struct Exposure {
  enum class Kind { RatePerHour, TimeProportion };

  Kind kind = Kind::RatePerHour;
  /// Events per hour, or the fraction of driving time spent in the scenario.
  double value = 0.0;
  /// Mean duration of one occurrence; required iff kind is TimeProportion.
  std::optional<double> mean_duration_hours;

  bool operator==(const Exposure&) const = default;
};

/// Human-readable scenario family. Risk tolerability is assessed per
/// functional scenario.
struct FunctionalScenario {
  std::string id;
  std::string description;
  std::vector<std::string> tags;
  Exposure exposure;
  /// Whether the non-ego actors of this family behave reasonably.
  bool others_reasonable = false;
  /// Relative expected demand on the system; drives budget allocation.
  double demand_prior = 1.0;

  bool operator==(const FunctionalScenario&) const = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Uniform&) const = default;
};

struct TruncNormal {
  double mean = 0.0;
  double sd = 1.0;
  double lo = -1.0;
  double hi = 1.0;
  bool operator==(const TruncNormal&) const = default;
};

struct Discrete {
  /// (value, probability) pairs in declaration order.
  std::vector<std::pair<double, double>> outcomes;
  bool operator==(const Discrete&) const = default;
};

using Distribution = std::variant<Uniform, TruncNormal, Discrete>;

/// True iff `x` lies inside the support of `d`.
bool in_support(const Distribution& d, double x);

struct ParameterSpec {
  std::string name;
  Distribution distribution;
  bool operator==(const ParameterSpec&) const = default;
};

enum class SceneKind { LeadBrake, CutIn, FreeDrive };

std::string_view to_string(SceneKind k) noexcept;
std::optional<SceneKind> scene_kind_from_string(std::string_view s) noexcept;

/// Template inputs each scene kind requires, in canonical order.
const std::vector<std::string>& scene_inputs(SceneKind k);

/// A scene template input is either a fixed number or the name of a
/// logical-scenario parameter.
using SceneInput = std::variant<double, std::string>;

struct SceneTemplate {
  SceneKind kind = SceneKind::FreeDrive;
  std::map<std::string, SceneInput> inputs;
  bool operator==(const SceneTemplate&) const = default;
};

struct LogicalScenario {
  std::string id;
  std::string functional_id;
  std::vector<ParameterSpec> parameters;
  SceneTemplate scene_template;
  /// Ruleset file, relative to the catalogue root.
  std::string ruleset_ref;

  const ParameterSpec* find_parameter(std::string_view name) const;

  bool operator==(const LogicalScenario&) const = default;
};

struct ConcreteScenario {
  std::string id;
  std::string logical_id;
  std::uint64_t seed = 0;
  std::map<std::string, double> assignments;

  bool operator==(const ConcreteScenario&) const = default;
};

/// Resolve every template input of `ls` against the assignments of `cs`.
/// Throws DataError when a referenced parameter is unassigned.
std::map<std::string, double> resolve_scene(const LogicalScenario& ls,
                                            const ConcreteScenario& cs);

}  // namespace adsv
