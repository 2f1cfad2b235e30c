#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ehg/events.hpp"

namespace ehg {

/// A disc-shaped object moving at constant velocity and emitting events as a
/// Poisson process.
struct SceneObject {
  double x0 = 0.0;         ///< start column, px
  double y0 = 0.0;         ///< start row, px
  double vx = 0.0;         ///< px/s
  double vy = 0.0;         ///< px/s
  double radius = 1.0;     ///< px
  double event_rate = 0.0; ///< events/s
};

/// Desk-scale stand-in for a recording.
///
/// Objects emit events uniformly inside their disc around the moving center.
/// Polarity is +1 on the leading half of the disc (offset along the velocity)
/// and -1 on the trailing half; a static object gets random polarity. Noise
/// events are uniform over sensor and time with random polarity.
struct SceneSpec {
  std::vector<SceneObject> objects;
  double noise_rate = 0.0;  ///< events/s over the whole sensor
  double duration = 0.05;   ///< s
  std::uint64_t seed = 0;
  SensorDims sensor;

  /// Throws ParameterError when a rate is negative or duration <= 0.
  void validate() const;
};

/// Generator output: stream-ordered events plus the originating object index
/// per event (-1 for noise).
struct LabeledStream {
  std::vector<Event> events;
  std::vector<int> labels;
};

/// Deterministic in (spec, spec.seed). Events falling outside the sensor are dropped.
LabeledStream synthesize_scene(const SceneSpec& spec);

/// Key-value scene file. Keys: sensor_width, sensor_height, duration,
/// noise_rate, seed, and one `object = x0 y0 vx vy radius rate` line per object.
/// `#` starts a comment.
SceneSpec parse_scene_spec(std::istream& in);
SceneSpec parse_scene_spec(const std::string& text);
void write_scene_spec(std::ostream& out, const SceneSpec& spec);

}  // namespace ehg
