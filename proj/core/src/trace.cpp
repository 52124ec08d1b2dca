#include "adsv/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

#include "adsv/error.hpp"
#include "json_util.hpp"

namespace adsv {

namespace {

constexpr std::string_view kMagic = "# trace v1";
constexpr double kStepTolerance = 1e-6;

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Plain decimal: -?digits(.digits)?
bool is_decimal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  const std::size_t int_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == int_start) return false;
  if (i == s.size()) return true;
  if (s[i] != '.') return false;
  const std::size_t frac_start = ++i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  return i > frac_start && i == s.size();
}

std::string location(std::size_t row, std::size_t col, std::string_view name) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col) + " (" +
         std::string(name) + ")";
}

std::string format_fixed(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) throw Error("trace number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// ChannelId
// ---------------------------------------------------------------------------

std::optional<std::size_t> builtin_arity(std::string_view name) {
  if (name == "speed" || name == "pos") return 1;
  if (name == "gap" || name == "closing_speed" || name == "ttc" || name == "collision") return 2;
  return std::nullopt;
}

std::string ChannelId::to_string() const {
  std::string s = name;
  for (const auto& a : actors) s += ":" + a;
  return s;
}

std::optional<ChannelId> ChannelId::parse(std::string_view column) {
  const auto parts = split(column, ':');
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  if (!std::all_of(parts.begin(), parts.end(), is_identifier)) return std::nullopt;
  ChannelId id{std::string(parts[0]), {}};
  for (std::size_t i = 1; i < parts.size(); ++i) id.actors.emplace_back(parts[i]);
  if (auto arity = builtin_arity(id.name); arity && *arity != id.actors.size()) return std::nullopt;
  return id;
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

Trace::Trace(double dt_nominal, std::vector<ChannelId> channels)
    : dt_(dt_nominal), channels_(std::move(channels)), columns_(channels_.size()) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("trace dt_nominal must be positive");
}

void Trace::push_row(double t, std::span<const double> values) {
  if (values.size() != channels_.size()) {
    throw std::invalid_argument("push_row: expected " + std::to_string(channels_.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  times_.push_back(t);
  for (std::size_t i = 0; i < values.size(); ++i) columns_[i].push_back(values[i]);
}

void Trace::add_channel(ChannelId id, std::vector<double> column) {
  if (column.size() != times_.size()) {
    throw std::invalid_argument("add_channel: column length does not match row count");
  }
  if (has(id)) throw std::invalid_argument("add_channel: duplicate channel " + id.to_string());
  channels_.push_back(std::move(id));
  columns_.push_back(std::move(column));
}

std::optional<std::size_t> Trace::find(const ChannelId& id) const {
  auto it = std::find(channels_.begin(), channels_.end(), id);
  if (it == channels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels_.begin());
}

const std::vector<double>& Trace::column(const ChannelId& id) const {
  auto idx = find(id);
  if (!idx) throw DataError("trace has no channel " + id.to_string());
  return columns_[*idx];
}

double Trace::duration() const noexcept {
  if (times_.empty()) return 0.0;
  return times_.back() - times_.front() + dt_;
}

void Trace::validate() const {
  if (!(dt_ > 0.0)) throw DataError("trace dt_nominal must be positive");
  if (times_.size() < 2) throw DataError("trace needs at least two rows");
  std::set<ChannelId> seen;
  for (const auto& ch : channels_) {
    if (!seen.insert(ch).second) throw DataError("duplicate channel " + ch.to_string());
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw DataError("non-finite time at " + location(i + 1, 1, "t"));
    }
    if (i == 0) continue;
    if (!(times_[i] > times_[i - 1])) {
      throw DataError("time not strictly increasing at row " + std::to_string(i + 1));
    }
    if (std::abs(times_[i] - times_[i - 1] - dt_) > kStepTolerance) {
      throw DataError("irregular time step at row " + std::to_string(i + 1) +
                      " (fixed-step traces only)");
    }
  }
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto& ch = channels_[c];
    const auto& col = columns_[c];
    const std::string name = ch.to_string();
    const bool is_ttc = ch.name == "ttc";
    const bool is_collision = ch.name == "collision";
    for (std::size_t r = 0; r < col.size(); ++r) {
      const double v = col[r];
      if (std::isnan(v) || (std::isinf(v) && !(is_ttc && v > 0))) {
        throw DataError("non-finite value at " + location(r + 1, c + 2, name));
      }
      if (is_collision) {
        if (v != 0.0 && v != 1.0) {
          throw DataError("collision value must be 0 or 1 at " + location(r + 1, c + 2, name));
        }
        if (r > 0 && v < col[r - 1]) {
          throw DataError("collision channel must be non-decreasing (" + name + " at row " +
                          std::to_string(r + 1) + ")");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

Trace parse_trace(std::string_view csv) {
  auto lines = split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != kMagic) {
    throw DataError("bad magic line: expected '" + std::string(kMagic) + "'");
  }
  if (lines.size() < 2) throw DataError("missing header line");

  const auto header = split(lines[1], ',');
  if (header[0] != "t") throw DataError("header column 1 must be 't'");
  std::vector<ChannelId> channels;
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto id = ChannelId::parse(header[c]);
    if (!id) {
      throw DataError("unknown column syntax '" + std::string(header[c]) + "' at header column " +
                      std::to_string(c + 1));
    }
    if (std::find(channels.begin(), channels.end(), *id) != channels.end()) {
      throw DataError("duplicate column '" + std::string(header[c]) + "' at header column " +
                      std::to_string(c + 1));
    }
    channels.push_back(std::move(*id));
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  for (std::size_t li = 2; li < lines.size(); ++li) {
    const std::size_t row = li - 1;
    const auto cells = split(lines[li], ',');
    if (cells.size() > header.size()) {
      throw DataError("extra cell at " + location(row, header.size() + 1, "-"));
    }
    std::vector<double> values(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string name = c == 0 ? "t" : channels[c - 1].to_string();
      if (c >= cells.size() || cells[c].empty()) {
        throw DataError("missing cell at " + location(row, c + 1, name));
      }
      const auto cell = cells[c];
      if (cell == "inf") {
        if (c == 0 || channels[c - 1].name != "ttc") {
          throw DataError("'inf' is only allowed in ttc columns, at " + location(row, c + 1, name));
        }
        values[c] = kInfinity;
        continue;
      }
      double v = 0.0;
      if (!is_decimal(cell)) {
        throw DataError("non-numeric cell '" + std::string(cell) + "' at " +
                        location(row, c + 1, name));
      }
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v,
                                       std::chars_format::fixed);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError("non-numeric cell '" + std::string(cell) + "' at " +
                        location(row, c + 1, name));
      }
      values[c] = v;
    }
    if (!times.empty() && !(values[0] > times.back())) {
      throw DataError("time not strictly increasing at row " + std::to_string(row));
    }
    times.push_back(values[0]);
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) throw DataError("trace needs at least two rows");

  Trace tr(times[1] - times[0], channels);
  for (const auto& r : rows) tr.push_row(r[0], std::span<const double>(r).subspan(1));
  tr.validate();
  return tr;
}

std::string serialize_trace(const Trace& tr) {
  std::string out(kMagic);
  out += "\nt";
  for (const auto& ch : tr.channels()) out += "," + ch.to_string();
  out += "\n";
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    out += format_fixed(tr.times()[r]);
    for (std::size_t c = 0; c < tr.channels().size(); ++c) {
      out += ",";
      out += format_fixed(tr.column(c)[r]);
    }
    out += "\n";
  }
  return out;
}

Trace read_trace_file(const std::string& path) {
  try {
    return parse_trace(detail::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_trace_file(const Trace& tr, const std::string& path) {
  detail::write_file(path, serialize_trace(tr));
}

// ---------------------------------------------------------------------------
// Derived channels
// ---------------------------------------------------------------------------

double ttc(double gap_m, double closing_speed_mps) {
  if (gap_m < 0.0) throw std::domain_error("ttc: negative gap");
  if (closing_speed_mps > kClosingEpsilon) return gap_m / closing_speed_mps;
  return kInfinity;
}

Trace derive_channels(const Trace& tr, const DeriveOptions& options) {
  auto pairs = options.pairs;
  if (pairs.empty()) {
    std::vector<std::string> actors;
    for (const auto& ch : tr.channels()) {
      if (ch.name != "pos" || !tr.has({"speed", ch.actors})) continue;
      actors.push_back(ch.actors[0]);
    }
    if (std::find(actors.begin(), actors.end(), "ego") != actors.end()) {
      for (const auto& a : actors) {
        if (a != "ego") pairs.emplace_back("ego", a);
      }
    }
  }

  auto half = [&](const std::string& actor) {
    auto it = options.half_length.find(actor);
    return it == options.half_length.end() ? 0.0 : it->second;
  };

  Trace out = tr;
  for (const auto& [a, b] : pairs) {
    const auto& pa = tr.column(ChannelId{"pos", {a}});
    const auto& va = tr.column(ChannelId{"speed", {a}});
    const auto& pb = tr.column(ChannelId{"pos", {b}});
    const auto& vb = tr.column(ChannelId{"speed", {b}});
    const double lengths = half(a) + half(b);

    const std::size_t n = tr.rows();
    std::vector<double> gap(n), closing(n), time_to(n), collision(n);
    bool collided = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double sep = pb[i] - pa[i];
      gap[i] = std::max(0.0, std::abs(sep) - lengths);
      closing[i] = sep >= 0.0 ? va[i] - vb[i] : vb[i] - va[i];
      time_to[i] = ttc(gap[i], closing[i]);
      collided = collided || gap[i] == 0.0;
      collision[i] = collided ? 1.0 : 0.0;
    }
    const std::vector<std::string> pair = {a, b};
    if (!out.has({"gap", pair})) out.add_channel({"gap", pair}, std::move(gap));
    if (!out.has({"closing_speed", pair})) out.add_channel({"closing_speed", pair}, std::move(closing));
    if (!out.has({"ttc", pair})) out.add_channel({"ttc", pair}, std::move(time_to));
    if (!out.has({"collision", pair})) out.add_channel({"collision", pair}, std::move(collision));
  }
  return out;
}

}  // namespace adsv
