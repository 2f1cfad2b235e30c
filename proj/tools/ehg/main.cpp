// ehg: event-stream sampling, motion hypergraphs and dual-space GCN training.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ehg/error.hpp"

using namespace ehg;
using namespace ehg::cli;

namespace {

const std::map<std::string, EventFormat> kFormats{{"csv", EventFormat::csv}, {"jsonl", EventFormat::jsonl}};
const std::map<std::string, SamplingMode> kModes{{"adaptive", SamplingMode::adaptive},
                                                 {"uniform", SamplingMode::uniform}};
const std::map<std::string, AggregationSource> kSources{{"pairwise", AggregationSource::pairwise},
                                                        {"hypergraph", AggregationSource::hypergraph},
                                                        {"both", AggregationSource::both}};
const std::map<std::string, Space> kSpaces{{"dual", Space::dual}, {"euclidean", Space::euclidean}};
const std::map<std::string, Activation> kActivations{{"relu", Activation::relu},
                                                     {"identity", Activation::identity}};
const std::map<std::string, Truncation> kTruncations{{"prefix", Truncation::prefix},
                                                     {"random", Truncation::random}};

void add_input(CLI::App* cmd, InputOptions& in, bool required = true) {
  auto* opt = cmd->add_option("--in", in.path, "Event file (t,x,y,p rows or JSONL)");
  if (required) opt->required();
  cmd->add_option("--format", in.format, "Event file format: csv or jsonl")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  cmd->add_flag("--polarity-01", in.polarity_zero_one, "Read polarity as {0,1} and map 0 to -1");
  cmd->add_option("--width", in.sensor.width, "Sensor width in pixels")->capture_default_str();
  cmd->add_option("--height", in.sensor.height, "Sensor height in pixels")->capture_default_str();
  cmd->add_option("--window-us", in.window_us,
                  "Tile the stream into windows of this many microseconds (0: one window)")
      ->capture_default_str();
}

void add_sampling(CLI::App* cmd, SamplingConfig& s) {
  cmd->add_option("--k", s.k, "Neighbours in the density estimate")->capture_default_str();
  cmd->add_option("--epsilon", s.epsilon, "Density stabilizer")->capture_default_str();
  cmd->add_option("--alpha", s.alpha, "Sigmoid sensitivity")->capture_default_str();
  cmd->add_option("--beta", s.beta, "Sigmoid bias on the normalized temporal variance")->capture_default_str();
  cmd->add_option("--time-scale", s.time_scale,
                  "Pixels per microsecond in the distance metric (0: sensor diagonal / window length)")
      ->capture_default_str();
  cmd->add_option("--sampling", s.mode, "adaptive or uniform")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  cmd->add_option("--rate", s.uniform_rate, "Retention probability in uniform mode")->capture_default_str();
}

void add_mvf(CLI::App* cmd, MvfConfig& m) {
  cmd->add_option("--sigma-v", m.sigma_v, "Direction tolerance")->capture_default_str();
  cmd->add_option("--sigma-s", m.sigma_s, "Intensity tolerance")->capture_default_str();
  cmd->add_option("--gamma", m.gamma, "Link threshold on the transition probability")->capture_default_str();
  cmd->add_option("--candidate-k", m.candidate_k, "Nearest neighbours scored per event")->capture_default_str();
}

void add_pipeline(CLI::App* cmd, PipelineConfig& p) {
  add_sampling(cmd, p.sampling);
  add_mvf(cmd, p.mvf);
  cmd->add_option("--graph-k", p.graph_k, "Neighbours in the pairwise graph")->capture_default_str();
}

void add_network(CLI::App* cmd, NetworkConfig& n) {
  cmd->add_option("--euclidean-widths", n.euclidean_widths, "Comma-separated Euclidean layer widths")
      ->delimiter(',');
  cmd->add_option("--hyperbolic-widths", n.hyperbolic_widths,
                  "Comma-separated second-stage layer widths")
      ->delimiter(',');
  cmd->add_option("--initial-c", n.initial_c, "Initial curvature of every hyperbolic layer")
      ->capture_default_str();
  cmd->add_option("--lr", n.learning_rate, "Learning rate, curvatures included")->capture_default_str();
  cmd->add_option("--c-min", n.c_min, "Lower bound on the curvatures")->capture_default_str();
  cmd->add_option("--aggregation", n.aggregation_source, "Second-stage graph: pairwise, hypergraph or both")
      ->transform(CLI::CheckedTransformer(kSources, CLI::ignore_case));
  cmd->add_option("--space", n.space, "Second stage: dual (hyperbolic) or euclidean")
      ->transform(CLI::CheckedTransformer(kSpaces, CLI::ignore_case));
  cmd->add_option("--activation", n.activation, "relu or identity")
      ->transform(CLI::CheckedTransformer(kActivations, CLI::ignore_case));
  cmd->add_flag("--fixed-curvature{false}", n.learn_curvature, "Freeze the curvatures");
  cmd->add_flag("--fusion", n.cross_layer_fusion, "Enable cross-layer Mobius fusion");
  cmd->add_option("--phase1-epochs", n.phase1_epochs, "Epochs of Euclidean-only training")->capture_default_str();
  cmd->add_option("--phase2-epochs", n.phase2_epochs, "Epochs of full training")->capture_default_str();
  cmd->add_option("--batch-size", n.batch_size, "Windows per SGD step")->capture_default_str();
  cmd->add_option("--clip", n.gradient_clip, "Global gradient-norm clip (0 disables)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-stream sampling, motion hypergraphs and dual-space graph networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; [command] sections, flags override it");
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Global seed; every command derives its own streams from it")
      ->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Render a scene spec (or a labelled dataset) to events");
  c_synth->add_option("--spec", synth.spec, "Scene spec file");
  c_synth->add_option("--out", synth.out, "Event CSV/JSONL output");
  c_synth->add_option("--labels", synth.labels, "Per-event object id sidecar (default <out>.labels)");
  c_synth->add_option("--format", synth.format, "csv or jsonl")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  auto& ds = synth.dataset_spec;
  c_synth->add_option("--dataset", synth.dataset, "Write a labelled motion dataset to this directory");
  c_synth->add_option("--classes", ds.classes, "Dataset classes (2-4)")->capture_default_str();
  c_synth->add_option("--per-class", ds.per_class, "Windows per class")->capture_default_str();
  c_synth->add_option("--duration", ds.duration, "Window length in seconds")->capture_default_str();
  c_synth->add_option("--speed", ds.speed, "Object speed, px/s")->capture_default_str();
  c_synth->add_option("--radius", ds.radius, "Object radius, px")->capture_default_str();
  c_synth->add_option("--event-rate", ds.event_rate, "Object events per second")->capture_default_str();
  c_synth->add_option("--noise-rate", ds.noise_rate, "Background events per second")->capture_default_str();
  c_synth->add_option("--distractors", ds.distractors, "Distractor objects per window")->capture_default_str();
  c_synth->add_option("--distractor-rate", ds.distractor_rate, "Distractor events per second")
      ->capture_default_str();
  c_synth->add_option("--width", ds.sensor.width, "Dataset sensor width")->capture_default_str();
  c_synth->add_option("--height", ds.sensor.height, "Dataset sensor height")->capture_default_str();

  SampleArgs smp;
  auto* c_sample = app.add_subcommand("sample", "Adaptive spatio-temporal sampling of an event stream");
  add_input(c_sample, smp.input);
  c_sample->add_option("--out", smp.out, "Retained events")->required();
  c_sample->add_option("--diagnostics", smp.diagnostics, "Per-event JSONL with density and probability");
  c_sample->add_option("--summary", smp.summary, "Per-window retention JSON");
  c_sample->add_option("--labels", smp.labels, "Label sidecar of the input; adds object/noise retention");
  c_sample->add_option("--labels-out", smp.labels_out, "Label sidecar of the retained events");
  add_sampling(c_sample, smp.sampling);

  HypergraphArgs hg;
  auto* c_hg = app.add_subcommand("hypergraph", "Motion-aware hyperedges of a (sampled) stream");
  add_input(c_hg, hg.input);
  c_hg->add_option("--out", hg.out, "Hypergraph JSONL")->required();
  c_hg->add_option("--stats", hg.stats, "Summary JSON");
  c_hg->add_option("--labels", hg.labels, "Label sidecar; adds hyperedge purity");
  c_hg->add_option("--time-scale", hg.time_scale, "Pixels per microsecond (0: sensor diagonal / window)")
      ->capture_default_str();
  add_mvf(c_hg, hg.mvf);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the classifier on a dataset directory");
  c_train->add_option("--data", tr.data, "Dataset directory (manifest.csv)")->required();
  c_train->add_option("--out", tr.out, "Checkpoint JSON")->required();
  c_train->add_option("--trace", tr.trace, "Per-epoch loss trace CSV");
  c_train->add_option("--metrics", tr.metrics, "Training metrics JSON");
  c_train->add_option("--classes", tr.classes, "Number of classes (default: largest label + 1)");
  add_pipeline(c_train, tr.pipeline);
  add_network(c_train, tr.network);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Accuracy of a checkpoint, optionally versus event count");
  c_eval->add_option("--model", ev.model, "Checkpoint JSON")->required();
  c_eval->add_option("--data", ev.data, "Dataset directory")->required();
  c_eval->add_option("--out", ev.out, "Metrics JSON");
  c_eval->add_option("--curve", ev.curve, "Accuracy-versus-events CSV");
  c_eval->add_option("--max-events", ev.max_events, "Comma-separated event budgets per window")->delimiter(',');
  c_eval->add_option("--fractions", ev.fractions, "Sweep K fractions 1/K..1 of every window");
  c_eval->add_option("--truncation", ev.truncation, "prefix or random")
      ->transform(CLI::CheckedTransformer(kTruncations, CLI::ignore_case));

  FlopsArgs fl;
  auto* c_flops = app.add_subcommand("flops", "FLOP estimate of one forward pass");
  c_flops->add_option("--model", fl.model, "Take the architecture from a checkpoint");
  c_flops->add_option("--events", fl.events, "Measure graph sizes on this event file (one window)");
  c_flops->add_option("--out", fl.out, "Report JSON (default stdout)");
  c_flops->add_option("--nodes", fl.stats.nodes, "Graph nodes")->capture_default_str();
  c_flops->add_option("--local-nnz", fl.stats.local_nnz, "Non-zeros of the first-stage aggregation")
      ->capture_default_str();
  c_flops->add_option("--global-nnz", fl.stats.global_nnz, "Non-zeros of the second-stage aggregation")
      ->capture_default_str();
  c_flops->add_option("--hyperedges", fl.stats.hyperedges, "Hyperedge count")->capture_default_str();
  c_flops->add_option("--width", fl.sensor.width, "Sensor width for --events")->capture_default_str();
  c_flops->add_option("--height", fl.sensor.height, "Sensor height for --events")->capture_default_str();
  add_pipeline(c_flops, fl.pipeline);
  add_network(c_flops, fl.network);
  c_flops->add_option("--num-classes", fl.network.num_classes, "Classifier outputs")->capture_default_str();

  AblateArgs ab;
  auto* c_ablate = app.add_subcommand("ablate", "Train and evaluate the 2^3 component grid");
  c_ablate->add_option("--data", ab.data, "Training dataset directory")->required();
  c_ablate->add_option("--test", ab.test, "Held-out dataset directory")->required();
  c_ablate->add_option("--out", ab.out, "Ablation CSV")->required();
  c_ablate->add_option("--seeds", ab.seeds, "Training seeds per combination")->capture_default_str();
  add_pipeline(c_ablate, ab.pipeline);
  add_network(c_ablate, ab.network);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_synth) run_synth(synth, seed);
    else if (*c_sample) run_sample(smp, seed);
    else if (*c_hg) run_hypergraph(hg, seed);
    else if (*c_train) run_train(tr, seed);
    else if (*c_eval) run_eval(ev, seed);
    else if (*c_flops) run_flops(fl, seed);
    else if (*c_ablate) run_ablate(ab, seed);
  } catch (const ParameterError& e) {
    std::cerr << "ehg: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "ehg: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ehg: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
