#pragma once

#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "adsv/error.hpp"

namespace adsv::detail {

using nlohmann::json;

/// Strict reader over one JSON object: every field must be consumed, and
/// errors name the JSON path of the offending field.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path);

  const std::string& path() const noexcept { return path_; }
  bool has(std::string_view key) const;

  const json& required(std::string_view key);
  const json* optional(std::string_view key);

  std::string string(std::string_view key);
  double number(std::string_view key);
  bool boolean(std::string_view key);
  std::uint64_t unsigned_integer(std::string_view key);
  const json& array(std::string_view key);
  const json& object(std::string_view key);

  /// Throws DataError naming the first unknown field.
  void finish() const;

  [[noreturn]] void fail(std::string_view key, std::string_view message) const;

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

json parse_json(std::string_view text, std::string_view what);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Shortest round-trip representation.
std::string format_number(double v);

}  // namespace adsv::detail
