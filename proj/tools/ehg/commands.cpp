#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ehg/checkpoint.hpp"
#include "ehg/error.hpp"
#include "ehg/hypergraph.hpp"
#include "ehg/random.hpp"
#include "ehg/sampling.hpp"

namespace ehg::cli {
namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<Event> read_events(const InputOptions& in) {
  auto file = open_in(in.path);
  ParseOptions opts;
  opts.format = in.format;
  opts.polarity_zero_one = in.polarity_zero_one;
  return parse_events(file, opts);
}

std::vector<EventWindow> read_windows(const InputOptions& in) {
  const auto events = read_events(in);
  if (events.empty()) return {};
  if (in.window_us > 0) return window_stream(events, in.window_us, in.sensor);
  // Still validates the sensor bounds.
  window_stream(events, events.back().t - events.front().t + 1, in.sensor);
  return {whole_window(events, in.sensor)};
}

/// One integer object id per line; -1 marks noise.
std::vector<int> read_labels(const fs::path& path) {
  auto in = open_in(path);
  std::vector<int> labels;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(row, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != row.size()) throw FormatError(line, "label must be an integer");
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
}

std::size_t total_events(const std::vector<EventWindow>& windows) {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.size();
  return n;
}

/// Identity "sample" so a stored stream can feed the hypergraph stage.
SampledStream as_sampled(const EventWindow& w, double time_scale) {
  SampledStream s;
  s.window = w;
  s.source_index.resize(w.size());
  for (std::uint32_t i = 0; i < w.size(); ++i) s.source_index[i] = i;
  s.probabilities.assign(w.size(), 1.0);
  s.window_rate = 1.0;
  SamplingConfig cfg;
  cfg.time_scale = time_scale;
  s.time_scale = cfg.resolved_time_scale(w);
  return s;
}

std::vector<LabeledWindow> load_dataset(const fs::path& dir) {
  auto data = read_dataset(dir);
  if (data.empty()) throw FormatError("dataset " + dir.string() + " has no windows");
  return data;
}

std::string fixed(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

}  // namespace

void run_synth(const SynthArgs& a, std::uint64_t seed) {
  if (!a.dataset.empty()) {
    auto spec = a.dataset_spec;
    spec.seed = derive_seed(seed, "dataset");
    const auto windows = make_motion_dataset(spec);
    write_dataset(a.dataset, windows);
    std::cout << "wrote " << windows.size() << " windows to " << a.dataset.string() << '\n';
    return;
  }
  if (a.spec.empty() || a.out.empty()) throw ParameterError("synth needs --spec and --out, or --dataset");
  auto file = open_in(a.spec);
  auto spec = parse_scene_spec(file);
  spec.seed = derive_seed(derive_seed(seed, "synth"), spec.seed);
  const auto scene = synthesize_scene(spec);
  {
    auto out = open_out(a.out);
    write_events(out, scene.events, a.format);
  }
  const auto labels = a.labels.empty() ? fs::path(a.out.string() + ".labels") : a.labels;
  write_labels(labels, scene.labels);
  std::cout << "wrote " << scene.events.size() << " events\n";
}

void run_sample(const SampleArgs& a, std::uint64_t seed) {
  a.sampling.validate();
  const auto windows = read_windows(a.input);
  std::vector<int> labels;
  if (!a.labels.empty()) {
    labels = read_labels(a.labels);
    if (labels.size() != total_events(windows)) {
      throw FormatError("label sidecar has " + std::to_string(labels.size()) + " rows for " +
                        std::to_string(total_events(windows)) + " events");
    }
  }

  auto out = open_out(a.out);
  std::ofstream diag;
  if (!a.diagnostics.empty()) diag = open_out(a.diagnostics);
  std::vector<int> kept_labels;
  json summary_windows = json::array();
  const auto base = derive_seed(seed, "sample");
  std::size_t offset = 0, all = 0, kept = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    SamplingConfig cfg = a.sampling;
    cfg.seed = derive_seed(base, w);
    const auto s = sample(windows[w], cfg);
    write_events(out, s.retained(), a.input.format);
    if (diag.is_open()) write_sampling_diagnostics(diag, windows[w], s, w);

    const auto n = windows[w].size();
    const double rate = n ? static_cast<double>(s.retained().size()) / static_cast<double>(n) : 0.0;
    json row = {{"window", w},
                {"t_start", windows[w].t_start},
                {"t_end", windows[w].t_end},
                {"events", n},
                {"kept", s.retained().size()},
                {"retention", rate}};
    std::cout << "window " << w << " [" << windows[w].t_start << ", " << windows[w].t_end
              << "): kept " << s.retained().size() << '/' << n << " (" << fixed(rate) << ')';
    if (!labels.empty()) {
      std::size_t obj = 0, obj_kept = 0, noise = 0, noise_kept = 0, next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool k = next < s.source_index.size() && s.source_index[next] == i;
        if (k) {
          ++next;
          kept_labels.push_back(labels[offset + i]);
        }
        if (labels[offset + i] >= 0) {
          ++obj;
          obj_kept += k;
        } else {
          ++noise;
          noise_kept += k;
        }
      }
      const double ro = obj ? static_cast<double>(obj_kept) / static_cast<double>(obj) : 0.0;
      const double rn = noise ? static_cast<double>(noise_kept) / static_cast<double>(noise) : 0.0;
      row["object_retention"] = ro;
      row["noise_retention"] = rn;
      std::cout << " object " << fixed(ro) << " noise " << fixed(rn);
    }
    std::cout << '\n';
    summary_windows.push_back(row);
    offset += n;
    all += n;
    kept += s.retained().size();
  }
  std::cout << "total: kept " << kept << '/' << all << '\n';
  if (!a.labels_out.empty()) write_labels(a.labels_out, kept_labels);
  if (!a.summary.empty()) {
    write_json(a.summary, {{"events", all}, {"kept", kept}, {"windows", summary_windows}});
  }
}

void run_hypergraph(const HypergraphArgs& a, std::uint64_t) {
  a.mvf.validate();
  const auto windows = read_windows(a.input);
  std::vector<int> labels;
  if (!a.labels.empty()) {
    labels = read_labels(a.labels);
    if (labels.size() != total_events(windows)) {
      throw FormatError("label sidecar has " + std::to_string(labels.size()) + " rows for " +
                        std::to_string(total_events(windows)) + " events");
    }
  }
  auto out = open_out(a.out);
  std::map<std::size_t, std::size_t> histogram;
  json per_window = json::array();
  std::size_t vertices = 0, edges = 0, offset = 0;
  double purity_sum = 0.0;
  std::size_t purity_windows = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto s = as_sampled(windows[w], a.time_scale);
    const auto g = build_hyperedges(motion_features(s), s, a.mvf);
    write_hypergraph_jsonl(out, g, w);
    for (const auto& e : g.hyperedges) ++histogram[e.size()];
    vertices += g.num_vertices();
    edges += g.num_hyperedges();
    json row = {{"window", w}, {"M", g.num_vertices()}, {"zeta", g.num_hyperedges()}};
    if (!labels.empty()) {
      const std::vector<int> local(labels.begin() + static_cast<std::ptrdiff_t>(offset),
                                   labels.begin() + static_cast<std::ptrdiff_t>(offset + windows[w].size()));
      const auto p = mean_purity(g, local);
      row["mean_purity"] = p ? json(*p) : json(nullptr);
      if (p) {
        purity_sum += *p;
        ++purity_windows;
      }
    }
    per_window.push_back(row);
    offset += windows[w].size();
  }
  json hist = json::object();
  for (const auto& [size, count] : histogram) hist[std::to_string(size)] = count;
  json stats = {{"windows", windows.size()},
                {"M", vertices},
                {"zeta", edges},
                {"size_histogram", hist}};
  if (!labels.empty()) {
    stats["mean_purity"] = purity_windows ? json(purity_sum / static_cast<double>(purity_windows)) : json(nullptr);
  }
  stats["per_window"] = per_window;
  std::cout << "M " << vertices << " zeta " << edges;
  if (!labels.empty() && purity_windows) {
    std::cout << " purity " << fixed(purity_sum / static_cast<double>(purity_windows));
  }
  std::cout << '\n';
  if (!a.stats.empty()) write_json(a.stats, stats);
}

void run_train(const TrainArgs& a, std::uint64_t seed) {
  const auto data = load_dataset(a.data);
  std::size_t max_label = 0;
  for (const auto& w : data) max_label = std::max(max_label, w.label);
  NetworkConfig net = a.network;
  net.num_classes = a.classes.value_or(max_label + 1);
  if (max_label >= net.num_classes) {
    throw FormatError("dataset label " + std::to_string(max_label) + " does not fit " +
                      std::to_string(net.num_classes) + " classes");
  }
  net.seed = derive_seed(seed, "network");
  net.validate();
  a.pipeline.sampling.validate();
  a.pipeline.mvf.validate();

  const auto examples = prepare_examples(data, a.pipeline, net.aggregation_source,
                                         derive_seed(seed, "train-sampling"));
  const auto result = train(examples, net);
  save_checkpoint(a.out, Checkpoint{result.model, a.pipeline});
  if (!a.trace.empty()) {
    auto out = open_out(a.trace);
    write_trace_csv(out, result.trace);
  }
  const auto& last = result.trace.back();
  std::cout << "epochs " << result.trace.size() << " loss " << fixed(last.loss) << " accuracy "
            << fixed(last.accuracy) << '\n';
  if (!a.metrics.empty()) {
    write_json(a.metrics, {{"windows", data.size()},
                           {"classes", net.num_classes},
                           {"epochs", result.trace.size()},
                           {"final_loss", last.loss},
                           {"train_accuracy", accuracy(result.model, examples)},
                           {"curvatures", result.model.curvatures()}});
  }
}

void run_eval(const EvalArgs& a, std::uint64_t seed) {
  if (!a.max_events.empty() && a.fractions > 0) {
    throw ParameterError("--max-events and --fractions are exclusive");
  }
  const auto ck = load_checkpoint(a.model);
  const auto data = load_dataset(a.data);
  for (const auto& w : data) {
    if (w.label >= ck.model.config.num_classes) {
      throw FormatError("dataset label " + std::to_string(w.label) + " is outside the model's " +
                        std::to_string(ck.model.config.num_classes) + " classes");
    }
  }
  const auto sample_seed = derive_seed(seed, "eval-sampling");
  const double acc = evaluate(ck.model, data, ck.pipeline, sample_seed);
  std::cout << "accuracy " << fixed(acc) << " on " << data.size() << " windows\n";

  json metrics = {{"windows", data.size()}, {"accuracy", acc}};
  std::ostringstream csv;
  csv << std::setprecision(10);
  if (!a.max_events.empty()) {
    json curve = json::array();
    csv << "max_events,accuracy\n";
    for (auto n : a.max_events) {
      std::vector<LabeledWindow> cut;
      for (std::size_t i = 0; i < data.size(); ++i) {
        cut.push_back({truncate_window(data[i].window, n, a.truncation,
                                       derive_seed(derive_seed(seed, "truncate"), i)),
                       data[i].label});
      }
      const double v = evaluate(ck.model, cut, ck.pipeline, sample_seed);
      csv << n << ',' << v << '\n';
      curve.push_back({{"max_events", n}, {"accuracy", v}});
      std::cout << "max_events " << n << " accuracy " << fixed(v) << '\n';
    }
    metrics["curve"] = curve;
  } else if (a.fractions > 0) {
    json curve = json::array();
    csv << "fraction,accuracy\n";
    for (const auto& p : accuracy_curve(ck.model, data, ck.pipeline, a.fractions, a.truncation,
                                        derive_seed(seed, "truncate"))) {
      csv << p.fraction << ',' << p.accuracy << '\n';
      curve.push_back({{"fraction", p.fraction}, {"accuracy", p.accuracy}});
      std::cout << "fraction " << fixed(p.fraction) << " accuracy " << fixed(p.accuracy) << '\n';
    }
    metrics["curve"] = curve;
  }
  if (!a.curve.empty()) {
    if (a.max_events.empty() && a.fractions == 0) {
      throw ParameterError("--curve needs --max-events or --fractions");
    }
    auto out = open_out(a.curve);
    out << csv.str();
  }
  if (!a.out.empty()) write_json(a.out, metrics);
}

void run_flops(const FlopsArgs& a, std::uint64_t seed) {
  NetworkConfig net = a.network;
  PipelineConfig pipeline = a.pipeline;
  if (!a.model.empty()) {
    const auto ck = load_checkpoint(a.model);
    net = ck.model.config;
    pipeline = ck.pipeline;
  }
  net.validate();
  WindowStats stats = a.stats;
  std::size_t input_events = 0;
  if (!a.events.empty()) {
    InputOptions in;
    in.path = a.events;
    in.sensor = a.sensor;
    const auto windows = read_windows(in);
    if (!windows.empty()) {
      const auto p = prepare_window(windows.front(), pipeline, net.aggregation_source,
                                    derive_seed(seed, "flops-sampling"));
      input_events = windows.front().size();
      stats.nodes = p.input.features.size();
      stats.local_nnz = p.input.local.nnz();
      stats.global_nnz = p.input.global.nnz();
      stats.hyperedges = p.hypergraph.num_hyperedges();
    } else {
      stats = {};
    }
  }
  const auto report = estimate_flops(net, stats);
  json layers = json::array();
  for (const auto& l : report.layers) {
    layers.push_back({{"name", l.name},
                      {"linear", l.linear},
                      {"aggregation", l.aggregation},
                      {"maps", l.maps},
                      {"total", l.total()}});
  }
  json j = {{"stats",
             {{"nodes", stats.nodes},
              {"local_nnz", stats.local_nnz},
              {"global_nnz", stats.global_nnz},
              {"hyperedges", stats.hyperedges}}},
            {"layers", layers},
            {"total", report.total},
            {"per_event", report.per_event}};
  if (!a.events.empty()) j["input_events"] = input_events;
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(a.out, j);
    std::cout << "total " << report.total << " flops, " << fixed(report.per_event) << " per event\n";
  }
}

void run_ablate(const AblateArgs& a, std::uint64_t seed) {
  if (a.seeds < 1) throw ParameterError("--seeds must be >= 1");
  const auto train_set = load_dataset(a.data);
  const auto test_set = load_dataset(a.test);
  NetworkConfig net = a.network;
  std::size_t max_label = 0;
  for (const auto& w : train_set) max_label = std::max(max_label, w.label);
  for (const auto& w : test_set) max_label = std::max(max_label, w.label);
  net.num_classes = max_label + 1;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(derive_seed(seed, i));

  const auto rows = run_ablation(train_set, test_set, a.pipeline, net, seeds);
  auto out = open_out(a.out);
  out << std::setprecision(10) << "adaptive_sampling,hypergraph,hyperbolic,mean_accuracy";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << ",seed_" << i;
  out << '\n';
  for (const auto& r : rows) {
    out << r.adaptive_sampling << ',' << r.hypergraph << ',' << r.hyperbolic << ',' << r.mean_accuracy;
    for (double v : r.accuracies) out << ',' << v;
    out << '\n';
    std::cout << "adaptive=" << r.adaptive_sampling << " hypergraph=" << r.hypergraph
              << " hyperbolic=" << r.hyperbolic << " mean " << fixed(r.mean_accuracy) << '\n';
  }
}

}  // namespace ehg::cli
