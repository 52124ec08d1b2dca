#include "json_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace adsv::detail {

ObjectReader::ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw DataError(path_ + ": expected an object");
}

bool ObjectReader::has(std::string_view key) const { return j_.contains(key); }

const json& ObjectReader::required(std::string_view key) {
  auto it = j_.find(key);
  if (it == j_.end()) fail(key, "missing required field");
  seen_.emplace(key);
  return *it;
}

const json* ObjectReader::optional(std::string_view key) {
  auto it = j_.find(key);
  if (it == j_.end()) return nullptr;
  seen_.emplace(key);
  return &*it;
}

std::string ObjectReader::string(std::string_view key) {
  const json& v = required(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

double ObjectReader::number(std::string_view key) {
  const json& v = required(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

bool ObjectReader::boolean(std::string_view key) {
  const json& v = required(key);
  if (!v.is_boolean()) fail(key, "expected a boolean");
  return v.get<bool>();
}

std::uint64_t ObjectReader::unsigned_integer(std::string_view key) {
  const json& v = required(key);
  if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

const json& ObjectReader::array(std::string_view key) {
  const json& v = required(key);
  if (!v.is_array()) fail(key, "expected an array");
  return v;
}

const json& ObjectReader::object(std::string_view key) {
  const json& v = required(key);
  if (!v.is_object()) fail(key, "expected an object");
  return v;
}

void ObjectReader::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (!seen_.contains(it.key())) fail(it.key(), "unknown field");
  }
}

void ObjectReader::fail(std::string_view key, std::string_view message) const {
  throw DataError(path_ + "." + std::string(key) + ": " + std::string(message));
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DataError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace adsv::detail
