#include "adsv/simkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "adsv/error.hpp"

namespace adsv::sim {

namespace {

// Joint deceleration of a colliding pair after contact.
constexpr double kPostImpactDecel = 5.0;

const std::set<std::string>& allowed_keys(ControllerKind k) {
  static const std::set<std::string> none;
  static const std::set<std::string> idm = {"max_accel",    "comfort_decel", "min_gap",
                                            "time_headway", "exponent",      "max_decel",
                                            "desired_speed"};
  static const std::set<std::string> scripted = {"brake_at", "decel"};
  switch (k) {
    case ControllerKind::ConstantSpeed: return none;
    case ControllerKind::IdmFollower: return idm;
    case ControllerKind::ScriptedBrake: return scripted;
  }
  return none;
}

double param_or(const SimConfig& cfg, const std::string& key, double fallback) {
  auto it = cfg.controller_params.find(key);
  return it == cfg.controller_params.end() ? fallback : it->second;
}

std::size_t step_count(const SimConfig& cfg) {
  const double ratio = cfg.horizon / cfg.dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw DataError("horizon " + std::to_string(cfg.horizon) + " s is not a whole number of " +
                    std::to_string(cfg.dt) + " s steps");
  }
  return static_cast<std::size_t>(steps);
}

double input(const std::map<std::string, double>& scene, const std::string& key) {
  auto it = scene.find(key);
  if (it == scene.end()) throw DataError("scene input '" + key + "' is not set");
  return it->second;
}

}  // namespace

std::string_view to_string(ControllerKind k) noexcept {
  switch (k) {
    case ControllerKind::ConstantSpeed: return "constant_speed";
    case ControllerKind::IdmFollower: return "idm_follower";
    case ControllerKind::ScriptedBrake: return "scripted_brake";
  }
  return "constant_speed";
}

std::optional<ControllerKind> controller_from_string(std::string_view s) noexcept {
  if (s == "constant_speed") return ControllerKind::ConstantSpeed;
  if (s == "idm_follower") return ControllerKind::IdmFollower;
  if (s == "scripted_brake") return ControllerKind::ScriptedBrake;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DataError("sim dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw DataError("sim horizon must be >= dt");
  if (!(vehicle_length >= 0.0)) throw DataError("vehicle_length must be nonnegative");
  step_count(*this);
  const auto& keys = allowed_keys(controller);
  for (const auto& [k, v] : controller_params) {
    if (!keys.contains(k)) {
      throw DataError("unknown parameter '" + k + "' for controller " +
                      std::string(to_string(controller)));
    }
    if (!std::isfinite(v)) throw DataError("controller parameter '" + k + "' must be finite");
  }
  if (controller == ControllerKind::IdmFollower) {
    const IdmParams p = idm_params(*this);
    if (!(p.max_accel > 0 && p.comfort_decel > 0 && p.exponent > 0 && p.max_decel > 0)) {
      throw DataError("idm_follower: max_accel, comfort_decel, exponent and max_decel must be positive");
    }
    if (p.min_gap < 0 || p.time_headway < 0 || p.desired_speed < 0) {
      throw DataError("idm_follower: min_gap, time_headway and desired_speed must be nonnegative");
    }
  }
  if (controller == ControllerKind::ScriptedBrake) {
    const ScriptedBrakeParams p = scripted_params(*this);
    if (!(p.brake_at >= 0 && p.decel > 0)) {
      throw DataError("scripted_brake: brake_at must be nonnegative and decel positive");
    }
  }
}

IdmParams idm_params(const SimConfig& cfg) {
  IdmParams p;
  p.max_accel = param_or(cfg, "max_accel", p.max_accel);
  p.comfort_decel = param_or(cfg, "comfort_decel", p.comfort_decel);
  p.min_gap = param_or(cfg, "min_gap", p.min_gap);
  p.time_headway = param_or(cfg, "time_headway", p.time_headway);
  p.exponent = param_or(cfg, "exponent", p.exponent);
  p.max_decel = param_or(cfg, "max_decel", p.max_decel);
  p.desired_speed = param_or(cfg, "desired_speed", p.desired_speed);
  return p;
}

ScriptedBrakeParams scripted_params(const SimConfig& cfg) {
  ScriptedBrakeParams p;
  p.brake_at = param_or(cfg, "brake_at", p.brake_at);
  p.decel = param_or(cfg, "decel", p.decel);
  return p;
}

double idm_accel(const IdmParams& p, double v, double desired, double gap, double closing) {
  const double v0 = std::max(desired, 0.1);
  double a = 1.0 - std::pow(v / v0, p.exponent);
  if (std::isfinite(gap)) {
    if (gap <= 0.0) return -p.max_decel;
    const double s_star =
        p.min_gap +
        std::max(0.0, v * p.time_headway + v * closing / (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
    a -= (s_star / gap) * (s_star / gap);
  }
  return std::clamp(p.max_accel * a, -p.max_decel, p.max_accel);
}

Trace simulate(const ConcreteScenario& cs, const LogicalScenario& ls, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t steps = step_count(cfg);
  const auto scene = resolve_scene(ls, cs);
  const SceneKind kind = ls.scene_template.kind;
  const bool has_lead = kind != SceneKind::FreeDrive;
  const double length = cfg.vehicle_length;

  double ego_x = 0.0;
  double ego_v = input(scene, "ego_speed");
  double lead_x = 0.0;
  double lead_v = 0.0;
  double lead_decel = 0.0;
  double brake_time = 0.0;
  double visible_from = 0.0;
  if (ego_v < 0.0) throw DataError(cs.id + ": ego_speed must be nonnegative");

  if (kind == SceneKind::LeadBrake) {
    const double gap = input(scene, "initial_gap");
    if (!(gap > 0.0)) throw DataError(cs.id + ": initial_gap must be positive");
    lead_x = gap + length;
    lead_v = input(scene, "lead_speed");
    lead_decel = input(scene, "lead_decel");
    brake_time = input(scene, "brake_time");
    if (lead_decel < 0.0) throw DataError(cs.id + ": lead_decel must be nonnegative");
  } else if (kind == SceneKind::CutIn) {
    lead_v = input(scene, "lead_speed");
    visible_from = input(scene, "cut_in_time");
    // Placed so the bumper gap is cut_in_gap when the cut-in happens,
    // assuming the ego holds its speed until then.
    const double gap = input(scene, "cut_in_gap") + (ego_v - lead_v) * visible_from;
    if (!(gap > 0.0)) throw DataError(cs.id + ": cut-in vehicle would start overlapping the ego");
    lead_x = gap + length;
    brake_time = std::numeric_limits<double>::infinity();
  }
  if (has_lead && lead_v < 0.0) throw DataError(cs.id + ": lead_speed must be nonnegative");

  std::vector<ChannelId> channels = {{"pos", {"ego"}}, {"speed", {"ego"}}};
  if (has_lead) {
    channels.push_back({"pos", {"lead"}});
    channels.push_back({"speed", {"lead"}});
  }
  Trace tr(cfg.dt, channels);

  const IdmParams idm = idm_params(cfg);
  const double desired = idm.desired_speed > 0.0 ? idm.desired_speed : ego_v;
  const ScriptedBrakeParams scripted = scripted_params(cfg);

  bool collided = false;
  bool merged = false;
  std::array<double, 4> row{};
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    row = {ego_x, ego_v, lead_x, lead_v};
    tr.push_row(t, std::span<const double>(row.data(), has_lead ? 4 : 2));
    if (i == steps) break;

    double ego_a = 0.0;
    double lead_a = 0.0;
    if (collided) {
      if (!merged) {
        ego_v = lead_v = 0.5 * (ego_v + lead_v);
        merged = true;
      }
      ego_a = lead_a = -kPostImpactDecel;
    } else {
      if (has_lead && t >= brake_time) lead_a = -lead_decel;
      switch (cfg.controller) {
        case ControllerKind::ConstantSpeed:
          break;
        case ControllerKind::ScriptedBrake:
          if (t >= scripted.brake_at) ego_a = -scripted.decel;
          break;
        case ControllerKind::IdmFollower: {
          const bool sees_lead = has_lead && t >= visible_from;
          const double gap = sees_lead ? lead_x - ego_x - length : kInfinity;
          ego_a = idm_accel(idm, ego_v, desired, gap, ego_v - lead_v);
          break;
        }
      }
    }

    ego_v = std::max(0.0, ego_v + ego_a * cfg.dt);
    ego_x += ego_v * cfg.dt;
    if (has_lead) {
      lead_v = std::max(0.0, lead_v + lead_a * cfg.dt);
      lead_x += lead_v * cfg.dt;
      if (!collided && lead_x - ego_x - length <= 0.0) collided = true;
    }
  }

  if (!has_lead) return tr;
  DeriveOptions opts;
  opts.pairs = {{"ego", "lead"}};
  opts.half_length = {{"ego", 0.5 * length}, {"lead", 0.5 * length}};
  return derive_channels(tr, opts);
}

}  // namespace adsv::sim
