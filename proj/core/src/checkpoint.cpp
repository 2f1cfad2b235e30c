#include "ehg/checkpoint.hpp"

#include <fstream>

#include "ehg/error.hpp"

namespace ehg {
namespace {

const char* name(AggregationSource s) {
  switch (s) {
    case AggregationSource::pairwise: return "pairwise";
    case AggregationSource::hypergraph: return "hypergraph";
    case AggregationSource::both: return "both";
  }
  return "pairwise";
}

AggregationSource aggregation_from(const std::string& s) {
  if (s == "pairwise") return AggregationSource::pairwise;
  if (s == "hypergraph") return AggregationSource::hypergraph;
  if (s == "both") return AggregationSource::both;
  throw FormatError("unknown aggregation source '" + s + "'");
}

}  // namespace

nlohmann::ordered_json to_json(const NetworkConfig& c) {
  return {{"input_dim", c.input_dim},
          {"euclidean_widths", c.euclidean_widths},
          {"hyperbolic_widths", c.hyperbolic_widths},
          {"num_classes", c.num_classes},
          {"initial_c", c.initial_c},
          {"learning_rate", c.learning_rate},
          {"c_min", c.c_min},
          {"seed", c.seed},
          {"aggregation_source", name(c.aggregation_source)},
          {"space", c.space == Space::dual ? "dual" : "euclidean"},
          {"activation", c.activation == Activation::relu ? "relu" : "identity"},
          {"learn_curvature", c.learn_curvature},
          {"cross_layer_fusion", c.cross_layer_fusion},
          {"phase1_epochs", c.phase1_epochs},
          {"phase2_epochs", c.phase2_epochs},
          {"batch_size", c.batch_size},
          {"gradient_clip", c.gradient_clip}};
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  const auto& s = c.sampling;
  return {{"sampling",
           {{"k", s.k},
            {"epsilon", s.epsilon},
            {"alpha", s.alpha},
            {"beta", s.beta},
            {"seed", s.seed},
            {"time_scale", s.time_scale},
            {"mode", s.mode == SamplingMode::adaptive ? "adaptive" : "uniform"},
            {"uniform_rate", s.uniform_rate}}},
          {"mvf",
           {{"sigma_v", c.mvf.sigma_v},
            {"sigma_s", c.mvf.sigma_s},
            {"gamma", c.mvf.gamma},
            {"candidate_k", c.mvf.candidate_k}}},
          {"graph_k", c.graph_k}};
}

NetworkConfig network_config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.euclidean_widths = j.at("euclidean_widths").get<std::vector<std::size_t>>();
  c.hyperbolic_widths = j.at("hyperbolic_widths").get<std::vector<std::size_t>>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.initial_c = j.at("initial_c").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.c_min = j.at("c_min").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.aggregation_source = aggregation_from(j.at("aggregation_source").get<std::string>());
  c.space = j.at("space").get<std::string>() == "euclidean" ? Space::euclidean : Space::dual;
  c.activation = j.at("activation").get<std::string>() == "identity" ? Activation::identity
                                                                     : Activation::relu;
  c.learn_curvature = j.at("learn_curvature").get<bool>();
  c.cross_layer_fusion = j.at("cross_layer_fusion").get<bool>();
  c.phase1_epochs = j.at("phase1_epochs").get<std::size_t>();
  c.phase2_epochs = j.at("phase2_epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.gradient_clip = j.at("gradient_clip").get<double>();
  return c;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  const auto& s = j.at("sampling");
  c.sampling.k = s.at("k").get<std::size_t>();
  c.sampling.epsilon = s.at("epsilon").get<double>();
  c.sampling.alpha = s.at("alpha").get<double>();
  c.sampling.beta = s.at("beta").get<double>();
  c.sampling.seed = s.at("seed").get<std::uint64_t>();
  c.sampling.time_scale = s.at("time_scale").get<double>();
  c.sampling.mode = s.at("mode").get<std::string>() == "uniform" ? SamplingMode::uniform
                                                                 : SamplingMode::adaptive;
  c.sampling.uniform_rate = s.at("uniform_rate").get<double>();
  const auto& m = j.at("mvf");
  c.mvf.sigma_v = m.at("sigma_v").get<double>();
  c.mvf.sigma_s = m.at("sigma_s").get<double>();
  c.mvf.gamma = m.at("gamma").get<double>();
  c.mvf.candidate_k = m.at("candidate_k").get<std::size_t>();
  c.graph_k = j.at("graph_k").get<std::size_t>();
  return c;
}

nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ck) {
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const auto& b : ck.model.layout.blocks) {
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  }
  return {{"format", "ehg-checkpoint"},
          {"version", kCheckpointVersion},
          {"network", to_json(ck.model.config)},
          {"pipeline", to_json(ck.pipeline)},
          {"blocks", blocks},
          {"params", ck.model.params}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ehg-checkpoint") {
      throw FormatError("not an ehg checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version");
    }
    Checkpoint ck;
    ck.model.config = network_config_from_json(j.at("network"));
    ck.model.config.validate();
    ck.model.layout = ParamLayout::build(ck.model.config);
    ck.model.params = j.at("params").get<std::vector<double>>();
    if (ck.model.params.size() != ck.model.layout.total) {
      throw FormatError("checkpoint parameter count does not match its configuration");
    }
    ck.pipeline = pipeline_config_from_json(j.at("pipeline"));
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << checkpoint_to_json(ck).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace ehg
