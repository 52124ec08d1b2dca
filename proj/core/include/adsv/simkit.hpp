#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "adsv/scenario.hpp"
#include "adsv/trace.hpp"

namespace adsv::sim {

enum class ControllerKind { ConstantSpeed, IdmFollower, ScriptedBrake };

std::string_view to_string(ControllerKind k) noexcept;
std::optional<ControllerKind> controller_from_string(std::string_view s) noexcept;

/// Intelligent driver model parameters. `desired_speed` <= 0 means the
/// scene's initial ego speed.
struct IdmParams {
  double max_accel = 1.5;        // a, m/s^2
  double comfort_decel = 2.0;    // b, m/s^2
  double min_gap = 2.0;          // s0, m
  double time_headway = 1.5;     // T, s
  double exponent = 4.0;         // delta
  double max_decel = 9.0;        // braking limit, m/s^2
  double desired_speed = 0.0;    // v0, m/s
};

/// Holds the initial speed, then brakes at `decel` from `brake_at` onwards.
struct ScriptedBrakeParams {
  double brake_at = 1e9;  // s
  double decel = 6.0;     // m/s^2
};

struct SimConfig {
  double dt = 0.05;
  double horizon = 20.0;
  ControllerKind controller = ControllerKind::IdmFollower;
  /// Overrides by name; see README for the per-controller keys.
  std::map<std::string, double> controller_params;
  double vehicle_length = 4.5;

  /// Throws DataError when dt, horizon, length or a controller parameter is
  /// out of range.
  void validate() const;
};

IdmParams idm_params(const SimConfig& cfg);
ScriptedBrakeParams scripted_params(const SimConfig& cfg);

/// IDM acceleration for an ego at speed `v` behind a leader `gap` metres
/// ahead closing at `closing` m/s; no leader when gap is infinite.
double idm_accel(const IdmParams& p, double v, double desired, double gap, double closing);

/// Runs one concrete scenario with semi-implicit Euler at fixed dt.
/// Actors are `ego` and, for lead_brake and cut_in, `lead`. After contact
/// the pair moves together at the mean speed and decelerates to rest.
/// Emits pos/speed per actor and derived pairwise channels.
Trace simulate(const ConcreteScenario& cs, const LogicalScenario& ls, const SimConfig& cfg);

}  // namespace adsv::sim
