#pragma once

#include <string>
#include <variant>
#include <vector>

#include "adsv/severity.hpp"

namespace adsv {

/// At least one applicable prescriptive rule was violated.
struct PrescriptiveFailure {
  std::vector<std::string> violated_rules;
  bool operator==(const PrescriptiveFailure&) const = default;
};

/// No prescriptive violation; the run is binned by severity.
struct Scored {
  Severity severity = Severity::None;
  bool operator==(const Scored&) const = default;
};

/// Result of scoring one concrete run.
using RunOutcome = std::variant<PrescriptiveFailure, Scored>;

inline bool is_failure(const RunOutcome& o) noexcept {
  return std::holds_alternative<PrescriptiveFailure>(o);
}

}  // namespace adsv
