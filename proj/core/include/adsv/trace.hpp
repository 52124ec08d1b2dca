#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adsv {

/// A named per-actor (arity 1) or per-pair (arity 2) signal.
///
/// Built-in channels: speed and pos take one actor; gap, closing_speed, ttc
/// and collision take an ordered pair. Any other name is a custom channel
/// with one or two actors.
struct ChannelId {
  std::string name;
  std::vector<std::string> actors;

  /// `name:actor` or `name:actorA:actorB`.
  std::string to_string() const;

  /// Inverse of to_string. Returns nullopt on malformed syntax or arity.
  static std::optional<ChannelId> parse(std::string_view column);

  auto operator<=>(const ChannelId&) const = default;
};

/// Expected arity of a built-in channel name; nullopt for custom names.
std::optional<std::size_t> builtin_arity(std::string_view name);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Fixed-step table of channel samples.
///
/// Units: speed and closing_speed m/s, pos and gap m (1-D station
/// coordinate), ttc s (infinite when opening), collision 0 or 1.
class Trace {
 public:
  Trace() = default;
  Trace(double dt_nominal, std::vector<ChannelId> channels);

  /// Append one row; `values` follows channel order.
  void push_row(double t, std::span<const double> values);

  /// Add a full column. Its length must equal the row count.
  void add_channel(ChannelId id, std::vector<double> column);

  double dt_nominal() const noexcept { return dt_; }
  std::size_t rows() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<ChannelId>& channels() const noexcept { return channels_; }

  std::optional<std::size_t> find(const ChannelId& id) const;
  bool has(const ChannelId& id) const { return find(id).has_value(); }
  const std::vector<double>& column(std::size_t index) const { return columns_.at(index); }
  /// Throws DataError when absent.
  const std::vector<double>& column(const ChannelId& id) const;

  /// Sum of per-row durations: t_last - t_first + dt_nominal.
  double duration() const noexcept;

  /// Checks every trace invariant; throws DataError describing the first
  /// violation with its row (1-based) and column.
  void validate() const;

  bool operator==(const Trace&) const = default;

 private:
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<ChannelId> channels_;
  std::vector<std::vector<double>> columns_;
};

/// Parses a `# trace v1` CSV document. Errors carry row/column locations.
Trace parse_trace(std::string_view csv);

/// Shortest round-trip fixed-notation numbers, `inf` for infinite ttc.
std::string serialize_trace(const Trace& tr);

Trace read_trace_file(const std::string& path);
void write_trace_file(const Trace& tr, const std::string& path);

/// Closing speeds at or below this are treated as not closing.
inline constexpr double kClosingEpsilon = 1e-6;

/// Time to collision in seconds: gap / closing speed while closing,
/// infinite otherwise. Throws std::domain_error for a negative gap.
double ttc(double gap_m, double closing_speed_mps);

struct DeriveOptions {
  /// Ordered actor pairs to derive; empty means ("ego", x) for every other
  /// actor with pos and speed channels, in header order.
  std::vector<std::pair<std::string, std::string>> pairs;
  /// Half vehicle length per actor; absent actors count as points.
  std::map<std::string, double> half_length;
};

/// Adds gap, closing_speed, ttc and collision for the requested pairs from
/// pos/speed channels. Existing channels are kept as they are. Throws
/// DataError when a source channel is missing.
Trace derive_channels(const Trace& tr, const DeriveOptions& options = {});

}  // namespace adsv
