#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ehg/events.hpp"
#include "ehg/network.hpp"
#include "ehg/pipeline.hpp"
#include "ehg/scene.hpp"

namespace ehg::cli {

namespace fs = std::filesystem;

struct InputOptions {
  fs::path path;
  EventFormat format = EventFormat::csv;
  bool polarity_zero_one = false;
  SensorDims sensor{128, 128};
  std::int64_t window_us = 0;  ///< 0 = the whole stream is one window
};

struct SynthArgs {
  fs::path spec;
  fs::path out;
  fs::path labels;  ///< defaults to <out>.labels
  EventFormat format = EventFormat::csv;
  fs::path dataset;  ///< dataset mode when set
  MotionDatasetSpec dataset_spec;
};

struct SampleArgs {
  InputOptions input;
  fs::path out;
  fs::path diagnostics;
  fs::path summary;
  fs::path labels;
  fs::path labels_out;
  SamplingConfig sampling;
};

struct HypergraphArgs {
  InputOptions input;
  fs::path out;
  fs::path stats;
  fs::path labels;
  double time_scale = 0.0;
  MvfConfig mvf;
};

struct TrainArgs {
  fs::path data;
  fs::path out;
  fs::path trace;
  fs::path metrics;
  std::optional<std::size_t> classes;
  PipelineConfig pipeline;
  NetworkConfig network;
};

struct EvalArgs {
  fs::path model;
  fs::path data;
  fs::path out;
  fs::path curve;
  std::vector<std::size_t> max_events;
  std::size_t fractions = 0;
  Truncation truncation = Truncation::prefix;
};

struct FlopsArgs {
  fs::path model;
  fs::path events;
  fs::path out;
  WindowStats stats;
  PipelineConfig pipeline;
  NetworkConfig network;
  SensorDims sensor{128, 128};
};

struct AblateArgs {
  fs::path data;
  fs::path test;
  fs::path out;
  std::size_t seeds = 5;
  PipelineConfig pipeline;
  NetworkConfig network;
};

void run_synth(const SynthArgs& a, std::uint64_t seed);
void run_sample(const SampleArgs& a, std::uint64_t seed);
void run_hypergraph(const HypergraphArgs& a, std::uint64_t seed);
void run_train(const TrainArgs& a, std::uint64_t seed);
void run_eval(const EvalArgs& a, std::uint64_t seed);
void run_flops(const FlopsArgs& a, std::uint64_t seed);
void run_ablate(const AblateArgs& a, std::uint64_t seed);

}  // namespace ehg::cli
