#include "ehg/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ehg/error.hpp"
#include "ehg/knn.hpp"
#include "ehg/random.hpp"

namespace ehg {

void SamplingConfig::validate() const {
  if (k < 1) throw ParameterError("sampling k must be >= 1");
  if (!(epsilon > 0.0)) throw ParameterError("sampling epsilon must be positive");
  if (!(alpha > 0.0)) throw ParameterError("sampling alpha must be positive");
  if (!std::isfinite(beta)) throw ParameterError("sampling beta must be finite");
  if (!(time_scale >= 0.0)) throw ParameterError("time scale must be non-negative");
  if (!(uniform_rate >= 0.0 && uniform_rate <= 1.0)) {
    throw ParameterError("uniform rate must lie in [0, 1]");
  }
}

double SamplingConfig::resolved_time_scale(const EventWindow& window) const {
  if (time_scale > 0.0) return time_scale;
  const auto span = std::max<std::int64_t>(window.duration(), 1);
  return window.sensor.diagonal() / static_cast<double>(span);
}

std::vector<double> mean_knn_distance(const EventWindow& window, std::size_t k, double time_scale) {
  const std::size_t n = window.size();
  if (n < 2) return std::vector<double>(n, std::numeric_limits<double>::infinity());
  const KnnIndex index(embed_events(window.events, time_scale));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = index.query(i, k);
    double sum = 0.0;
    for (const auto& nb : nbrs) sum += nb.distance;
    out[i] = sum / static_cast<double>(nbrs.size());
  }
  return out;
}

double density(double mean_distance, double epsilon) {
  if (std::isinf(mean_distance)) return 0.0;
  return 1.0 / (mean_distance + epsilon);
}

double temporal_variance(const EventWindow& window) {
  if (window.empty()) return 0.0;
  const double span = static_cast<double>(std::max<std::int64_t>(window.duration(), 1));
  double mean = 0.0;
  for (const auto& e : window.events) mean += static_cast<double>(e.t - window.t_start) / span;
  mean /= static_cast<double>(window.size());
  double var = 0.0;
  for (const auto& e : window.events) {
    const double d = static_cast<double>(e.t - window.t_start) / span - mean;
    var += d * d;
  }
  return var / static_cast<double>(window.size());
}

double sampling_rate(double variance, double alpha, double beta) {
  return 1.0 / (1.0 + std::exp(-alpha * (variance - beta)));
}

std::vector<double> final_probabilities(double rate, const std::vector<double>& densities) {
  double max_d = 0.0;
  for (double d : densities) max_d = std::max(max_d, d);
  std::vector<double> p(densities.size(), rate);
  if (max_d > 0.0) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = rate * (densities[i] / max_d);
  }
  return p;
}

SampledStream sample(const EventWindow& window, const SamplingConfig& cfg) {
  cfg.validate();
  SampledStream out;
  out.window.t_start = window.t_start;
  out.window.t_end = window.t_end;
  out.window.sensor = window.sensor;
  out.time_scale = cfg.resolved_time_scale(window);
  if (window.empty()) return out;

  const auto mean_dist = mean_knn_distance(window, cfg.k, out.time_scale);
  out.densities.resize(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    out.densities[i] = density(mean_dist[i], cfg.epsilon);
  }
  if (cfg.mode == SamplingMode::uniform) {
    out.window_rate = cfg.uniform_rate;
    out.probabilities.assign(window.size(), cfg.uniform_rate);
  } else {
    out.window_rate = sampling_rate(temporal_variance(window), cfg.alpha, cfg.beta);
    out.probabilities = final_probabilities(out.window_rate, out.densities);
  }

  Rng rng(derive_seed(cfg.seed, "sample"));
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (rng.uniform() < out.probabilities[i]) {
      out.window.events.push_back(window.events[i]);
      out.source_index.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

void write_sampling_diagnostics(std::ostream& out, const EventWindow& input,
                                const SampledStream& sampled, std::optional<std::size_t> window) {
  std::size_t next = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const bool kept = next < sampled.source_index.size() && sampled.source_index[next] == i;
    if (kept) ++next;
    const auto& e = input.events[i];
    auto row = nlohmann::ordered_json::object();
    if (window) row["window"] = *window;
    row["i"] = i;
    row["x"] = e.x;
    row["y"] = e.y;
    row["t"] = e.t;
    row["density"] = sampled.densities[i];
    row["probability"] = sampled.probabilities[i];
    row["kept"] = kept;
    out << row.dump() << '\n';
  }
}

}  // namespace ehg
