#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ehg {

/// One event-camera event: pixel (x, y), timestamp t in microseconds, and
/// polarity p in {-1, +1}.
struct Event {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int64_t t = 0;
  std::int8_t p = 1;

  /// Stream order: by t, ties broken by (x, y, p).
  friend constexpr auto operator<=>(const Event& a, const Event& b) noexcept {
    if (auto c = a.t <=> b.t; c != 0) return c;
    if (auto c = a.x <=> b.x; c != 0) return c;
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.p <=> b.p;
  }
  friend constexpr bool operator==(const Event&, const Event&) noexcept = default;
};

struct SensorDims {
  std::int32_t width = 128;
  std::int32_t height = 128;

  double diagonal() const;
  friend constexpr bool operator==(const SensorDims&, const SensorDims&) noexcept = default;
};

/// Events inside the half-open interval [t_start, t_end).
struct EventWindow {
  std::vector<Event> events;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  SensorDims sensor;

  std::int64_t duration() const { return t_end - t_start; }
  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

enum class EventFormat { csv, jsonl };

struct ParseOptions {
  EventFormat format = EventFormat::csv;
  /// Accept polarity in {0, 1} and remap 0 -> -1. Without it, 0 is an error.
  bool polarity_zero_one = false;
};

/// Reads events and returns them sorted in stream order.
/// Throws FormatError carrying the 1-based line number of the first bad row.
std::vector<Event> parse_events(std::istream& in, const ParseOptions& opts = {});
std::vector<Event> parse_events(const std::string& text, const ParseOptions& opts = {});

void write_events(std::ostream& out, const std::vector<Event>& events,
                  EventFormat format = EventFormat::csv);

/// Splits a sorted stream into consecutive windows of length `window_us`
/// starting at the first timestamp. Empty windows in the middle are kept so
/// that window index maps affinely to time.
std::vector<EventWindow> window_stream(const std::vector<Event>& events, std::int64_t window_us,
                                       SensorDims sensor = {});

/// Single window covering all events, [t_min, t_max + 1).
EventWindow whole_window(const std::vector<Event>& events, SensorDims sensor = {});

bool is_stream_ordered(const std::vector<Event>& events);

}  // namespace ehg
