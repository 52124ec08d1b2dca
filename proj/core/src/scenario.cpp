#include "adsv/scenario.hpp"

#include <algorithm>

#include "adsv/error.hpp"

namespace adsv {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

bool in_support(const Distribution& d, double x) {
  return std::visit(overloaded{
                        [x](const Uniform& u) { return x >= u.lo && x <= u.hi; },
                        [x](const TruncNormal& n) { return x >= n.lo && x <= n.hi; },
                        [x](const Discrete& dd) {
                          return std::any_of(dd.outcomes.begin(), dd.outcomes.end(),
                                             [x](const auto& o) { return o.first == x; });
                        },
                    },
                    d);
}

std::string_view to_string(SceneKind k) noexcept {
  switch (k) {
    case SceneKind::LeadBrake: return "lead_brake";
    case SceneKind::CutIn: return "cut_in";
    case SceneKind::FreeDrive: return "free_drive";
  }
  return "free_drive";
}

std::optional<SceneKind> scene_kind_from_string(std::string_view s) noexcept {
  if (s == "lead_brake") return SceneKind::LeadBrake;
  if (s == "cut_in") return SceneKind::CutIn;
  if (s == "free_drive") return SceneKind::FreeDrive;
  return std::nullopt;
}

const std::vector<std::string>& scene_inputs(SceneKind k) {
  static const std::vector<std::string> lead_brake = {"ego_speed", "lead_speed", "initial_gap",
                                                      "lead_decel", "brake_time"};
  static const std::vector<std::string> cut_in = {"ego_speed", "lead_speed", "cut_in_gap",
                                                  "cut_in_time"};
  static const std::vector<std::string> free_drive = {"ego_speed"};
  switch (k) {
    case SceneKind::LeadBrake: return lead_brake;
    case SceneKind::CutIn: return cut_in;
    case SceneKind::FreeDrive: return free_drive;
  }
  return free_drive;
}

const ParameterSpec* LogicalScenario::find_parameter(std::string_view name) const {
  auto it = std::find_if(parameters.begin(), parameters.end(),
                         [name](const ParameterSpec& p) { return p.name == name; });
  return it == parameters.end() ? nullptr : &*it;
}

std::map<std::string, double> resolve_scene(const LogicalScenario& ls,
                                            const ConcreteScenario& cs) {
  std::map<std::string, double> out;
  for (const auto& [input, source] : ls.scene_template.inputs) {
    if (const double* fixed = std::get_if<double>(&source)) {
      out[input] = *fixed;
      continue;
    }
    const auto& param = std::get<std::string>(source);
    auto it = cs.assignments.find(param);
    if (it == cs.assignments.end()) {
      throw DataError("concrete scenario '" + cs.id + "': parameter '" + param +
                      "' (scene input '" + input + "') is not assigned");
    }
    out[input] = it->second;
  }
  return out;
}

}  // namespace adsv
