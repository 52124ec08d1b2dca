#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace adsv {

/// Harm level of one run. `None` sits below S0 and means no undesired
/// outcome; S0..S3 follow the ISO 26262 severity classes.
enum class Severity : int { None = -1, S0 = 0, S1 = 1, S2 = 2, S3 = 3 };

inline constexpr std::array<Severity, 4> kScoredLevels = {Severity::S0, Severity::S1,
                                                          Severity::S2, Severity::S3};

constexpr int ordinal(Severity s) noexcept { return static_cast<int>(s); }

constexpr Severity max(Severity a, Severity b) noexcept { return a < b ? b : a; }

/// "SNONE", "S0" .. "S3".
std::string_view to_string(Severity s) noexcept;

/// Inverse of to_string; nullopt for anything else.
std::optional<Severity> severity_from_string(std::string_view text) noexcept;

}  // namespace adsv
