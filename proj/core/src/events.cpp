#include "ehg/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ehg/error.hpp"

namespace ehg {
namespace {

template <typename Int>
Int parse_int(std::string_view field, std::size_t line, const char* name) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  Int value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw FormatError(line, std::string("field '") + name + "' is not an integer: '" +
                                std::string(field) + "'");
  }
  return value;
}

std::int8_t check_polarity(std::int64_t raw, std::size_t line, bool zero_one) {
  if (zero_one) {
    if (raw == 0) return -1;
    if (raw == 1) return 1;
    throw FormatError(line, "polarity must be 0 or 1 with --polarity-zero-one, got " +
                                std::to_string(raw));
  }
  if (raw == 1 || raw == -1) return static_cast<std::int8_t>(raw);
  throw FormatError(line, "polarity must be -1 or +1, got " + std::to_string(raw));
}

Event checked_event(std::int64_t x, std::int64_t y, std::int64_t t, std::int64_t p,
                    std::size_t line, bool zero_one) {
  if (x < 0 || y < 0) throw FormatError(line, "negative pixel coordinate");
  if (x > INT32_MAX || y > INT32_MAX) throw FormatError(line, "pixel coordinate out of range");
  if (t < 0) throw FormatError(line, "negative timestamp");
  return Event{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y), t,
               check_polarity(p, line, zero_one)};
}

Event parse_csv_row(std::string_view row, std::size_t line, bool zero_one) {
  std::string_view fields[4];
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= row.size(); ++i) {
    if (i == row.size() || row[i] == ',') {
      if (n == 4) throw FormatError(line, "expected 4 fields x,y,t,p");
      fields[n++] = row.substr(start, i - start);
      start = i + 1;
    }
  }
  if (n != 4) throw FormatError(line, "expected 4 fields x,y,t,p");
  return checked_event(parse_int<std::int64_t>(fields[0], line, "x"),
                       parse_int<std::int64_t>(fields[1], line, "y"),
                       parse_int<std::int64_t>(fields[2], line, "t"),
                       parse_int<std::int64_t>(fields[3], line, "p"), line, zero_one);
}

Event parse_jsonl_row(std::string_view row, std::size_t line, bool zero_one) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(row);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError(line, "expected a JSON object");
  auto field = [&](const char* key) -> std::int64_t {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(line, std::string("missing key '") + key + "'");
    if (!it->is_number_integer()) {
      throw FormatError(line, std::string("key '") + key + "' must be an integer");
    }
    return it->get<std::int64_t>();
  };
  return checked_event(field("x"), field("y"), field("t"), field("p"), line, zero_one);
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

double SensorDims::diagonal() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

std::vector<Event> parse_events(std::istream& in, const ParseOptions& opts) {
  std::vector<Event> events;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (blank(row)) continue;
    events.push_back(opts.format == EventFormat::csv
                         ? parse_csv_row(row, line, opts.polarity_zero_one)
                         : parse_jsonl_row(row, line, opts.polarity_zero_one));
  }
  std::sort(events.begin(), events.end());
  return events;
}

std::vector<Event> parse_events(const std::string& text, const ParseOptions& opts) {
  std::istringstream in(text);
  return parse_events(in, opts);
}

void write_events(std::ostream& out, const std::vector<Event>& events, EventFormat format) {
  for (const auto& e : events) {
    const int p = e.p;
    if (format == EventFormat::csv) {
      out << e.x << ',' << e.y << ',' << e.t << ',' << p << '\n';
    } else {
      out << "{\"x\":" << e.x << ",\"y\":" << e.y << ",\"t\":" << e.t << ",\"p\":" << p << "}\n";
    }
  }
}

bool is_stream_ordered(const std::vector<Event>& events) {
  return std::is_sorted(events.begin(), events.end());
}

std::vector<EventWindow> window_stream(const std::vector<Event>& events, std::int64_t window_us,
                                       SensorDims sensor) {
  if (window_us <= 0) throw ParameterError("window length must be positive");
  if (!is_stream_ordered(events)) throw ParameterError("events must be sorted before windowing");
  std::vector<EventWindow> windows;
  if (events.empty()) return windows;

  const std::int64_t t0 = events.front().t;
  const std::int64_t count = (events.back().t - t0) / window_us + 1;
  windows.resize(static_cast<std::size_t>(count));
  for (std::int64_t w = 0; w < count; ++w) {
    auto& win = windows[static_cast<std::size_t>(w)];
    win.t_start = t0 + w * window_us;
    win.t_end = win.t_start + window_us;
    win.sensor = sensor;
  }
  for (const auto& e : events) {
    if (e.x >= sensor.width || e.y >= sensor.height) {
      throw DomainError("event (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                        ") outside the sensor");
    }
    windows[static_cast<std::size_t>((e.t - t0) / window_us)].events.push_back(e);
  }
  return windows;
}

EventWindow whole_window(const std::vector<Event>& events, SensorDims sensor) {
  EventWindow win;
  win.sensor = sensor;
  win.events = events;
  if (!events.empty()) {
    win.t_start = events.front().t;
    win.t_end = events.back().t + 1;
  }
  return win;
}

}  // namespace ehg
