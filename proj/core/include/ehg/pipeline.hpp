#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ehg/events.hpp"
#include "ehg/hypergraph.hpp"
#include "ehg/network.hpp"
#include "ehg/sampling.hpp"

namespace ehg {

/// Preprocessing shared by training and evaluation.
struct PipelineConfig {
  SamplingConfig sampling;
  MvfConfig mvf;
  std::size_t graph_k = 6;  ///< neighbours in the pairwise graph
};

/// Everything derived from one window on the way to the network.
struct PreparedWindow {
  SampledStream sampled;
  SparseAdjacency adjacency;
  Hypergraph hypergraph;
  GraphInput input;
};

/// sample -> pairwise graph + motion hypergraph -> features and aggregation
/// matrices. `sample_seed` replaces cfg.sampling.seed for this window.
PreparedWindow prepare_window(const EventWindow& window, const PipelineConfig& cfg,
                              AggregationSource source, std::uint64_t sample_seed);

struct LabeledWindow {
  EventWindow window;
  std::size_t label = 0;
};

/// Toy classification set: one disc per window moving in a class-specific
/// direction (0 right, 1 left, 2 up, 3 down) plus uniform noise and optional
/// slower distractor discs moving in random class directions.
struct MotionDatasetSpec {
  std::size_t classes = 3;
  std::size_t per_class = 60;
  double duration = 0.05;      ///< s per window
  double speed = 600.0;        ///< px/s
  double radius = 5.0;         ///< px
  double event_rate = 3000.0;  ///< events/s of the labelled object
  double noise_rate = 1000.0;  ///< events/s over the sensor
  std::size_t distractors = 0;
  double distractor_rate = 1000.0;
  SensorDims sensor{64, 64};
  std::uint64_t seed = 0;

  void validate() const;
};

std::vector<LabeledWindow> make_motion_dataset(const MotionDatasetSpec& spec);

/// Directory layout: manifest.csv (`file,label,t_start,t_end,width,height`
/// with a header row) next to one event CSV per window.
void write_dataset(const std::filesystem::path& dir, const std::vector<LabeledWindow>& windows);
std::vector<LabeledWindow> read_dataset(const std::filesystem::path& dir);

enum class Truncation { prefix, random };

/// First n events of the window (prefix) or a seeded random n-subset kept in
/// stream order (random). Windows with <= n events are returned unchanged.
EventWindow truncate_window(const EventWindow& window, std::size_t n, Truncation mode,
                            std::uint64_t seed);

/// Runs prepare_window on every labelled window. Window i samples with
/// derive_seed(seed, i).
std::vector<TrainingExample> prepare_examples(const std::vector<LabeledWindow>& windows,
                                              const PipelineConfig& cfg, AggregationSource source,
                                              std::uint64_t seed);

/// Fraction of windows classified correctly; windows that end up empty after
/// sampling count as wrong.
double evaluate(const Model& model, const std::vector<LabeledWindow>& windows,
                const PipelineConfig& cfg, std::uint64_t seed);

struct CurvePoint {
  double fraction = 0.0;
  double accuracy = 0.0;
};

/// Accuracy after truncating every window to ceil(fraction * size) events,
/// for fractions 1/steps .. 1.
std::vector<CurvePoint> accuracy_curve(const Model& model, const std::vector<LabeledWindow>& windows,
                                       const PipelineConfig& cfg, std::size_t steps,
                                       Truncation mode, std::uint64_t seed);

struct AblationRow {
  bool adaptive_sampling = false;
  bool hypergraph = false;
  bool hyperbolic = false;
  std::vector<double> accuracies;  ///< one per seed
  double mean_accuracy = 0.0;
};

/// Trains and evaluates the 2^3 grid of (adaptive vs uniform sampling,
/// hypergraph vs pairwise aggregation, dual-space vs Euclidean stack).
std::vector<AblationRow> run_ablation(const std::vector<LabeledWindow>& train_set,
                                      const std::vector<LabeledWindow>& test_set,
                                      const PipelineConfig& pipeline, const NetworkConfig& network,
                                      const std::vector<std::uint64_t>& seeds);

/// Pipeline and network settings for one ablation combination.
void apply_ablation(bool adaptive, bool hypergraph, bool hyperbolic, PipelineConfig& pipeline,
                    NetworkConfig& network);

}  // namespace ehg
