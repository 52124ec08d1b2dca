#include "adsv/severity.hpp"

namespace adsv {

std::string_view to_string(Severity s) noexcept {
  switch (s) {
    case Severity::None: return "SNONE";
    case Severity::S0: return "S0";
    case Severity::S1: return "S1";
    case Severity::S2: return "S2";
    case Severity::S3: return "S3";
  }
  return "SNONE";
}

std::optional<Severity> severity_from_string(std::string_view text) noexcept {
  if (text == "SNONE") return Severity::None;
  if (text == "S0") return Severity::S0;
  if (text == "S1") return Severity::S1;
  if (text == "S2") return Severity::S2;
  if (text == "S3") return Severity::S3;
  return std::nullopt;
}

}  // namespace adsv
