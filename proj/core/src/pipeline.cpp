#include "ehg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "ehg/error.hpp"
#include "ehg/parallel.hpp"
#include "ehg/random.hpp"
#include "ehg/scene.hpp"

namespace ehg {
namespace {

constexpr double kDirections[4][2] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}};

// Start coordinate range keeping a disc of radius r on [0, extent) while it
// travels `travel` px along this axis.
double random_start(Rng& rng, double extent, double r, double travel) {
  const double lo = r + std::max(0.0, -travel);
  const double hi = extent - 1.0 - r - std::max(0.0, travel);
  return hi > lo ? rng.uniform(lo, hi) : 0.5 * (extent - 1.0);
}

}  // namespace

PreparedWindow prepare_window(const EventWindow& window, const PipelineConfig& cfg,
                              AggregationSource source, std::uint64_t sample_seed) {
  PreparedWindow p;
  SamplingConfig sc = cfg.sampling;
  sc.seed = sample_seed;
  p.sampled = sample(window, sc);
  if (p.sampled.retained().empty()) return p;

  p.adjacency = build_pairwise_graph(p.sampled, cfg.graph_k);
  const auto motion = motion_features(p.sampled);
  p.hypergraph = build_hyperedges(motion, p.sampled, cfg.mvf);
  p.hypergraph.features = init_features(p.sampled, p.adjacency);

  auto& in = p.input;
  in.features.reserve(p.hypergraph.features.nodes.size());
  for (const auto& f : p.hypergraph.features.nodes) in.features.emplace_back(f.begin(), f.end());
  in.local = normalize_adjacency(p.adjacency);
  switch (source) {
    case AggregationSource::pairwise:
      in.global = in.local;
      break;
    case AggregationSource::hypergraph:
      in.global = normalize_hypergraph(p.hypergraph);
      break;
    case AggregationSource::both:
      in.global = mean_aggregation(in.local, normalize_hypergraph(p.hypergraph));
      break;
  }
  in.neighbors = p.adjacency;
  return p;
}

void MotionDatasetSpec::validate() const {
  if (classes < 2 || classes > 4) throw ParameterError("motion dataset supports 2 to 4 classes");
  if (per_class < 1) throw ParameterError("per_class must be >= 1");
  if (!(duration > 0.0)) throw ParameterError("duration must be positive");
  if (!(event_rate >= 0.0) || !(noise_rate >= 0.0) || !(distractor_rate >= 0.0)) {
    throw ParameterError("rates must be non-negative");
  }
}

std::vector<LabeledWindow> make_motion_dataset(const MotionDatasetSpec& spec) {
  spec.validate();
  std::vector<LabeledWindow> out;
  const auto duration_us = static_cast<std::int64_t>(std::llround(spec.duration * 1e6));
  std::size_t index = 0;
  for (std::size_t n = 0; n < spec.per_class; ++n) {
    for (std::size_t cls = 0; cls < spec.classes; ++cls, ++index) {
      Rng rng(derive_seed(spec.seed, index));
      SceneSpec scene;
      scene.sensor = spec.sensor;
      scene.duration = spec.duration;
      scene.noise_rate = spec.noise_rate;
      scene.seed = rng.next();

      auto add_object = [&](std::size_t dir, double speed, double rate) {
        SceneObject o;
        o.vx = kDirections[dir][0] * speed;
        o.vy = kDirections[dir][1] * speed;
        o.radius = spec.radius;
        o.event_rate = rate;
        o.x0 = random_start(rng, spec.sensor.width, o.radius, o.vx * spec.duration);
        o.y0 = random_start(rng, spec.sensor.height, o.radius, o.vy * spec.duration);
        scene.objects.push_back(o);
      };
      add_object(cls, spec.speed, spec.event_rate);
      for (std::size_t d = 0; d < spec.distractors; ++d) {
        add_object(static_cast<std::size_t>(rng.below(spec.classes)), 0.5 * spec.speed,
                   spec.distractor_rate);
      }

      LabeledWindow lw;
      lw.label = cls;
      lw.window.events = synthesize_scene(scene).events;
      lw.window.t_start = 0;
      lw.window.t_end = duration_us;
      lw.window.sensor = spec.sensor;
      out.push_back(std::move(lw));
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<LabeledWindow>& windows) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.csv").string());
  manifest << "file,label,t_start,t_end,width,height\n";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    std::ostringstream name;
    name << 'w' << std::setw(5) << std::setfill('0') << i << ".csv";
    const auto& w = windows[i].window;
    std::ofstream ev(dir / name.str());
    if (!ev) throw IoError("cannot write " + (dir / name.str()).string());
    write_events(ev, w.events);
    manifest << name.str() << ',' << windows[i].label << ',' << w.t_start << ',' << w.t_end << ','
             << w.sensor.width << ',' << w.sensor.height << '\n';
  }
}

std::vector<LabeledWindow> read_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.csv");
  if (!manifest) throw IoError("cannot read " + (dir / "manifest.csv").string());
  std::vector<LabeledWindow> out;
  std::string row;
  std::size_t line = 0;
  while (std::getline(manifest, row)) {
    ++line;
    if (line == 1 || row.empty()) continue;
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream in(row);
    std::string file;
    LabeledWindow lw;
    if (!(in >> file >> lw.label >> lw.window.t_start >> lw.window.t_end >> lw.window.sensor.width >>
          lw.window.sensor.height)) {
      throw FormatError(line, "manifest row needs file,label,t_start,t_end,width,height");
    }
    std::ifstream ev(dir / file);
    if (!ev) throw IoError("cannot read " + (dir / file).string());
    lw.window.events = parse_events(ev);
    for (const auto& e : lw.window.events) {
      if (e.t < lw.window.t_start || e.t >= lw.window.t_end) {
        throw FormatError(line, "event outside the window bounds in " + file);
      }
    }
    out.push_back(std::move(lw));
  }
  return out;
}

EventWindow truncate_window(const EventWindow& window, std::size_t n, Truncation mode,
                            std::uint64_t seed) {
  if (window.size() <= n) return window;
  EventWindow out = window;
  if (mode == Truncation::prefix) {
    out.events.resize(n);
    return out;
  }
  std::vector<std::size_t> idx(window.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "truncate"));
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  out.events.clear();
  for (auto i : idx) out.events.push_back(window.events[i]);
  return out;
}

std::vector<TrainingExample> prepare_examples(const std::vector<LabeledWindow>& windows,
                                              const PipelineConfig& cfg, AggregationSource source,
                                              std::uint64_t seed) {
  std::vector<TrainingExample> out(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) {
    auto p = prepare_window(windows[i].window, cfg, source, derive_seed(seed, i));
    if (p.input.features.empty()) {
      throw ParameterError("window " + std::to_string(i) + " is empty after sampling");
    }
    out[i].input = std::move(p.input);
    out[i].label = windows[i].label;
  });
  return out;
}

double evaluate(const Model& model, const std::vector<LabeledWindow>& windows,
                const PipelineConfig& cfg, std::uint64_t seed) {
  if (windows.empty()) return 0.0;
  std::vector<char> correct(windows.size(), 0);
  parallel_for(windows.size(), [&](std::size_t i) {
    const auto p = prepare_window(windows[i].window, cfg, model.config.aggregation_source,
                                  derive_seed(seed, i));
    if (p.input.features.empty()) return;
    correct[i] = predict(model, p.input) == windows[i].label;
  });
  return static_cast<double>(std::count(correct.begin(), correct.end(), 1)) /
         static_cast<double>(windows.size());
}

std::vector<CurvePoint> accuracy_curve(const Model& model, const std::vector<LabeledWindow>& windows,
                                       const PipelineConfig& cfg, std::size_t steps,
                                       Truncation mode, std::uint64_t seed) {
  if (steps < 1) throw ParameterError("curve needs at least one step");
  std::vector<CurvePoint> curve;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double fraction = static_cast<double>(s) / static_cast<double>(steps);
    std::vector<LabeledWindow> cut;
    cut.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const auto n = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(windows[i].window.size()) - 1e-9));
      cut.push_back({truncate_window(windows[i].window, n, mode, derive_seed(seed, i)),
                     windows[i].label});
    }
    curve.push_back({fraction, evaluate(model, cut, cfg, seed)});
  }
  return curve;
}

void apply_ablation(bool adaptive, bool hypergraph, bool hyperbolic, PipelineConfig& pipeline,
                    NetworkConfig& network) {
  pipeline.sampling.mode = adaptive ? SamplingMode::adaptive : SamplingMode::uniform;
  network.aggregation_source = hypergraph ? AggregationSource::hypergraph : AggregationSource::pairwise;
  network.space = hyperbolic ? Space::dual : Space::euclidean;
}

std::vector<AblationRow> run_ablation(const std::vector<LabeledWindow>& train_set,
                                      const std::vector<LabeledWindow>& test_set,
                                      const PipelineConfig& pipeline, const NetworkConfig& network,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<AblationRow> rows;
  for (int mask = 0; mask < 8; ++mask) {
    AblationRow row;
    row.adaptive_sampling = (mask & 4) != 0;
    row.hypergraph = (mask & 2) != 0;
    row.hyperbolic = (mask & 1) != 0;
    PipelineConfig pc = pipeline;
    NetworkConfig nc = network;
    apply_ablation(row.adaptive_sampling, row.hypergraph, row.hyperbolic, pc, nc);
    for (auto seed : seeds) {
      nc.seed = derive_seed(seed, "network");
      const auto examples = prepare_examples(train_set, pc, nc.aggregation_source,
                                             derive_seed(seed, "train-sampling"));
      const auto trained = train(examples, nc);
      row.accuracies.push_back(evaluate(trained.model, test_set, pc, derive_seed(seed, "test-sampling")));
    }
    row.mean_accuracy = std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) /
                        static_cast<double>(std::max<std::size_t>(row.accuracies.size(), 1));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ehg
