#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehg/events.hpp"

namespace ehg {

enum class SamplingMode {
  adaptive,  ///< density-weighted sigmoid rate
  uniform,   ///< fixed retention probability for every event
};

struct SamplingConfig {
  std::size_t k = 8;        ///< neighbours in the density estimate
  double epsilon = 1e-3;    ///< density stabilizer
  double alpha = 20.0;      ///< sigmoid sensitivity
  double beta = 0.05;       ///< motion-intensity bias, normalized-time^2 units
  std::uint64_t seed = 0;
  /// Multiplier placing t (us) on the pixel axis. 0 selects the default,
  /// sensor diagonal / window length.
  double time_scale = 0.0;
  SamplingMode mode = SamplingMode::adaptive;
  double uniform_rate = 0.5;

  void validate() const;
  double resolved_time_scale(const EventWindow& window) const;
};

/// Result of sampling one window.
struct SampledStream {
  EventWindow window;                     ///< retained events, same bounds as the input
  std::vector<std::uint32_t> source_index;///< position of each retained event in the input
  std::vector<double> probabilities;      ///< per input event
  std::vector<double> densities;          ///< per input event
  double window_rate = 0.0;               ///< scalar rate from the sigmoid
  double time_scale = 1.0;

  const std::vector<Event>& retained() const { return window.events; }
};

/// Mean distance from each event to its k nearest other events in
/// (x, y, scale * t). With fewer than k others all of them are used; with
/// fewer than two events every value is +inf.
std::vector<double> mean_knn_distance(const EventWindow& window, std::size_t k, double time_scale);

/// 1 / (mean_distance + epsilon); 0 for an infinite distance.
double density(double mean_distance, double epsilon);

/// Population variance of timestamps normalized to [0, 1] over the window
/// bounds. 0 for an empty window.
double temporal_variance(const EventWindow& window);

/// 1 / (1 + exp(-alpha (variance - beta))).
double sampling_rate(double variance, double alpha, double beta);

/// rate * d_i / max_j d_j, or rate everywhere when every density is zero.
std::vector<double> final_probabilities(double rate, const std::vector<double>& densities);

/// Independent Bernoulli retention of each event, seeded by cfg.seed.
SampledStream sample(const EventWindow& window, const SamplingConfig& cfg);

/// One JSON object per input event: {["window",] "i", "x", "y", "t", "density",
/// "probability", "kept"}; i indexes the input window.
void write_sampling_diagnostics(std::ostream& out, const EventWindow& input,
                                const SampledStream& sampled,
                                std::optional<std::size_t> window = std::nullopt);

}  // namespace ehg
