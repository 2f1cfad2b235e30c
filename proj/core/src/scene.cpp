#include "ehg/scene.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "ehg/error.hpp"
#include "ehg/random.hpp"

namespace ehg {
namespace {

constexpr double kMicros = 1e6;

std::int8_t random_polarity(Rng& rng) { return rng.bernoulli(0.5) ? 1 : -1; }

bool on_sensor(std::int64_t x, std::int64_t y, SensorDims s) {
  return x >= 0 && y >= 0 && x < s.width && y < s.height;
}

// Poisson-process arrival times in [0, duration) seconds.
template <typename F>
void poisson_arrivals(Rng& rng, double rate, double duration, F&& emit) {
  if (rate <= 0.0) return;
  double t = rng.exponential(rate);
  while (t < duration) {
    emit(t);
    t += rng.exponential(rate);
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v, std::size_t line, const std::string& key) {
  std::istringstream in(v);
  double d = 0.0;
  in >> d;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw FormatError(line, "value of '" + key + "' is not a number");
  }
  return d;
}

}  // namespace

void SceneSpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ParameterError("scene duration must be positive");
  }
  if (!(noise_rate >= 0.0)) throw ParameterError("noise_rate must be non-negative");
  if (sensor.width <= 0 || sensor.height <= 0) throw ParameterError("sensor dims must be positive");
  for (const auto& o : objects) {
    if (!(o.event_rate >= 0.0)) throw ParameterError("object event rate must be non-negative");
    if (!(o.radius >= 0.0)) throw ParameterError("object radius must be non-negative");
  }
}

LabeledStream synthesize_scene(const SceneSpec& spec) {
  spec.validate();
  struct Tagged {
    Event e;
    int label;
  };
  std::vector<Tagged> out;

  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto& obj = spec.objects[k];
    Rng rng(derive_seed(spec.seed, k));
    const double speed = std::hypot(obj.vx, obj.vy);
    poisson_arrivals(rng, obj.event_rate, spec.duration, [&](double t) {
      const double cx = obj.x0 + obj.vx * t;
      const double cy = obj.y0 + obj.vy * t;
      // Rejection sample a pixel whose center lies inside the disc.
      double px = std::round(cx);
      double py = std::round(cy);
      for (int attempt = 0; attempt < 64; ++attempt) {
        const double r = obj.radius * std::sqrt(rng.uniform());
        const double phi = 2.0 * M_PI * rng.uniform();
        const double qx = std::round(cx + r * std::cos(phi));
        const double qy = std::round(cy + r * std::sin(phi));
        if (std::hypot(qx - cx, qy - cy) <= obj.radius) {
          px = qx;
          py = qy;
          break;
        }
      }
      const double along = (px - cx) * obj.vx + (py - cy) * obj.vy;
      std::int8_t p;
      if (speed > 0.0 && along != 0.0) {
        p = along > 0.0 ? 1 : -1;
        rng.next();  // keep the draw count independent of the branch
      } else {
        p = random_polarity(rng);
      }
      const auto ix = static_cast<std::int64_t>(px);
      const auto iy = static_cast<std::int64_t>(py);
      if (!on_sensor(ix, iy, spec.sensor)) return;
      out.push_back({Event{static_cast<std::int32_t>(ix), static_cast<std::int32_t>(iy),
                           static_cast<std::int64_t>(std::floor(t * kMicros)), p},
                     static_cast<int>(k)});
    });
  }

  Rng noise(derive_seed(spec.seed, "noise"));
  poisson_arrivals(noise, spec.noise_rate, spec.duration, [&](double t) {
    const auto x = static_cast<std::int32_t>(noise.below(static_cast<std::uint64_t>(spec.sensor.width)));
    const auto y = static_cast<std::int32_t>(noise.below(static_cast<std::uint64_t>(spec.sensor.height)));
    out.push_back({Event{x, y, static_cast<std::int64_t>(std::floor(t * kMicros)),
                         random_polarity(noise)},
                   -1});
  });

  std::sort(out.begin(), out.end(), [](const Tagged& a, const Tagged& b) {
    return std::tie(a.e, a.label) < std::tie(b.e, b.label);
  });
  LabeledStream result;
  result.events.reserve(out.size());
  result.labels.reserve(out.size());
  for (const auto& t : out) {
    result.events.push_back(t.e);
    result.labels.push_back(t.label);
  }
  return result;
}

SceneSpec parse_scene_spec(std::istream& in) {
  SceneSpec spec;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (auto hash = row.find('#'); hash != std::string::npos) row.erase(hash);
    row = trim(row);
    if (row.empty()) continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos) throw FormatError(line, "expected 'key = value'");
    const std::string key = trim(row.substr(0, eq));
    const std::string value = trim(row.substr(eq + 1));
    if (key == "object") {
      std::istringstream vs(value);
      SceneObject o;
      if (!(vs >> o.x0 >> o.y0 >> o.vx >> o.vy >> o.radius >> o.event_rate) ||
          !(vs >> std::ws).eof()) {
        throw FormatError(line, "object needs 'x0 y0 vx vy radius rate'");
      }
      spec.objects.push_back(o);
    } else if (key == "sensor_width") {
      spec.sensor.width = static_cast<std::int32_t>(to_double(value, line, key));
    } else if (key == "sensor_height") {
      spec.sensor.height = static_cast<std::int32_t>(to_double(value, line, key));
    } else if (key == "duration") {
      spec.duration = to_double(value, line, key);
    } else if (key == "noise_rate") {
      spec.noise_rate = to_double(value, line, key);
    } else if (key == "seed") {
      std::istringstream vs(value);
      if (!(vs >> spec.seed) || !(vs >> std::ws).eof()) {
        throw FormatError(line, "seed must be a non-negative integer");
      }
    } else {
      throw FormatError(line, "unknown key '" + key + "'");
    }
  }
  return spec;
}

SceneSpec parse_scene_spec(const std::string& text) {
  std::istringstream in(text);
  return parse_scene_spec(in);
}

void write_scene_spec(std::ostream& out, const SceneSpec& spec) {
  out << std::setprecision(17);
  out << "sensor_width = " << spec.sensor.width << '\n'
      << "sensor_height = " << spec.sensor.height << '\n'
      << "duration = " << spec.duration << '\n'
      << "noise_rate = " << spec.noise_rate << '\n'
      << "seed = " << spec.seed << '\n';
  for (const auto& o : spec.objects) {
    out << "object = " << o.x0 << ' ' << o.y0 << ' ' << o.vx << ' ' << o.vy << ' ' << o.radius
        << ' ' << o.event_rate << '\n';
  }
}

}  // namespace ehg
