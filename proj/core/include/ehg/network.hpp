#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ehg/autodiff.hpp"
#include "ehg/hyperbolic.hpp"
#include "ehg/hypergraph.hpp"
#include "ehg/matrix.hpp"

namespace ehg {

enum class Activation { relu, identity };
enum class AggregationSource { pairwise, hypergraph, both };
/// dual: Euclidean stage followed by hyperbolic layers. euclidean: the
/// hyperbolic layers are replaced by Euclidean layers of the same widths.
enum class Space { dual, euclidean };

/// Sparse non-negative aggregation weights, rows sorted by column.
struct AggregationMatrix {
  struct Entry {
    std::uint32_t col;
    double weight;
  };
  std::vector<std::vector<Entry>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t nnz() const;
  double at(std::uint32_t r, std::uint32_t c) const;
  static AggregationMatrix identity(std::size_t n);
};

/// D^{-1/2} (Adj + I) D^{-1/2}. Self loops are added when missing.
AggregationMatrix normalize_adjacency(const SparseAdjacency& adjacency);
/// D_v^{-1/2} H D_e^{-1} H^T D_v^{-1/2} with unit hyperedge weights. Vertices
/// in no hyperedge keep a unit self loop.
AggregationMatrix normalize_hypergraph(const Hypergraph& graph);
/// Element-wise mean of two matrices over the same vertices.
AggregationMatrix mean_aggregation(const AggregationMatrix& a, const AggregationMatrix& b);

template <typename T>
using NodeRows = std::vector<std::vector<T>>;

// ---------------------------------------------------------------------------
// Layers. T is double or ad::Var.

template <typename T>
T apply_activation(const T& v, Activation act) {
  if (act == Activation::identity) return v;
  return ad::value(v) > 0.0 ? v : T(0.0);
}

/// act(A X W^T + b).
template <typename T>
NodeRows<T> euclidean_gcn_layer(const NodeRows<T>& x, const AggregationMatrix& a,
                                const MatrixView<T>& w, std::span<const T> b,
                                Activation act = Activation::relu) {
  if (a.size() != x.size()) throw ParameterError("aggregation size differs from node count");
  if (b.size() != w.rows) throw ParameterError("bias width differs from weight rows");
  NodeRows<T> xw(x.size(), std::vector<T>(w.rows));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != w.cols) throw ParameterError("feature width differs from weight columns");
    for (std::size_t r = 0; r < w.rows; ++r) xw[i][r] = hyperbolic::dot(w.row(r), std::span<const T>(x[i]));
  }
  NodeRows<T> out(x.size(), std::vector<T>(w.rows));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t r = 0; r < w.rows; ++r) {
      T acc = b[r];
      for (const auto& e : a.rows[i]) acc += e.weight * xw[e.col][r];
      out[i][r] = apply_activation(acc, act);
    }
  }
  return out;
}

/// Row-wise exponential map at the origin.
template <typename T>
NodeRows<T> to_hyperbolic(const NodeRows<T>& x, const T& c) {
  NodeRows<T> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(hyperbolic::exp_map_origin(row, c));
  return out;
}

/// (W (x)_c h) (+)_c exp_o^c(b) per node.
template <typename T>
NodeRows<T> hyperbolic_transform(const NodeRows<T>& h, const MatrixView<T>& w,
                                 std::span<const T> b, const T& c_in) {
  if (b.size() != w.rows) throw ParameterError("bias width differs from weight rows");
  const auto hb = hyperbolic::exp_map_origin(b, c_in);
  NodeRows<T> out;
  out.reserve(h.size());
  for (const auto& row : h) {
    if (row.size() != w.cols) throw ParameterError("point width differs from weight columns");
    out.push_back(hyperbolic::mobius_add(hyperbolic::mobius_matvec(w, std::span<const T>(row), c_in), hb, c_in));
  }
  return out;
}

/// exp_o( sum_j A_ij log_o(h_j) ).
template <typename T>
NodeRows<T> hyperbolic_aggregate(const NodeRows<T>& h, const AggregationMatrix& a, const T& c) {
  if (a.size() != h.size()) throw ParameterError("aggregation size differs from node count");
  NodeRows<T> tangent;
  tangent.reserve(h.size());
  for (const auto& row : h) tangent.push_back(hyperbolic::log_map_origin(row, c));
  NodeRows<T> out;
  out.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::vector<T> acc(h.empty() ? 0 : h[i].size(), T(0.0));
    for (const auto& e : a.rows[i]) {
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += e.weight * tangent[e.col][d];
    }
    out.push_back(hyperbolic::exp_map_origin(acc, c));
  }
  return out;
}

/// exp_o^{c_out}( act( log_o^{c_in}(h) ) ).
template <typename T>
NodeRows<T> hyperbolic_activation(const NodeRows<T>& h, Activation act, const T& c_in,
                                  const T& c_out) {
  NodeRows<T> out;
  out.reserve(h.size());
  for (const auto& row : h) {
    auto v = hyperbolic::log_map_origin(row, c_in);
    for (auto& e : v) e = apply_activation(e, act);
    out.push_back(hyperbolic::exp_map_origin(v, c_out));
  }
  return out;
}

/// h (+)_c exp_o( sum_j log_o(n_j) ).
template <typename T>
std::vector<T> mobius_fusion(const std::vector<T>& h, const NodeRows<T>& neighbors, const T& c) {
  std::vector<T> sum(h.size(), T(0.0));
  for (const auto& n : neighbors) {
    const auto t = hyperbolic::log_map_origin(n, c);
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += t[d];
  }
  return hyperbolic::mobius_add(h, hyperbolic::exp_map_origin(sum, c), c);
}

/// Parameters of one hyperbolic layer, double precision.
struct LayerParams {
  Matrix w;
  std::vector<double> b;
  double c_in = 1.0;
  double c_out = 1.0;
  Activation activation = Activation::relu;
};

/// Transform, aggregate, activate.
template <typename T>
NodeRows<T> hyperbolic_layer(const NodeRows<T>& h, const AggregationMatrix& a,
                             const MatrixView<T>& w, std::span<const T> b, const T& c_in,
                             const T& c_out, Activation act) {
  return hyperbolic_activation(hyperbolic_aggregate(hyperbolic_transform(h, w, b, c_in), a, c_in),
                               act, c_in, c_out);
}

NodeRows<double> hyperbolic_layer(const NodeRows<double>& h, const AggregationMatrix& a,
                                  const LayerParams& p);

/// Tangent mean-pool followed by an affine map. For Euclidean features pass
/// a null curvature to skip the log map.
template <typename T>
std::vector<T> readout_classify(const NodeRows<T>& h, const MatrixView<T>& w_out,
                                std::span<const T> b_out, const T* c) {
  if (h.empty()) throw ParameterError("no events to classify");
  std::vector<T> pooled(h.front().size(), T(0.0));
  for (const auto& row : h) {
    const auto t = c ? hyperbolic::log_map_origin(row, *c) : row;
    for (std::size_t d = 0; d < pooled.size(); ++d) pooled[d] += t[d];
  }
  const double inv = 1.0 / static_cast<double>(h.size());
  for (auto& p : pooled) p = p * inv;
  if (w_out.cols != pooled.size()) throw ParameterError("classifier width mismatch");
  std::vector<T> logits(w_out.rows);
  for (std::size_t k = 0; k < w_out.rows; ++k) {
    logits[k] = b_out[k] + hyperbolic::dot(w_out.row(k), std::span<const T>(pooled));
  }
  return logits;
}

/// Softmax cross-entropy, computed with the log-sum-exp shift.
template <typename T>
T cross_entropy(const std::vector<T>& logits, std::size_t label) {
  using std::exp;
  using std::log;
  using ad::exp;
  using ad::log;
  if (label >= logits.size()) throw ParameterError("label out of range");
  double shift = ad::value(logits.front());
  for (const auto& l : logits) shift = std::max(shift, ad::value(l));
  T sum = 0.0;
  for (const auto& l : logits) sum += exp(l - shift);
  return log(sum) + shift - logits[label];
}

double loss(const std::vector<double>& logits, std::size_t label);

// ---------------------------------------------------------------------------
// Model

struct NetworkConfig {
  std::size_t input_dim = 4;
  std::vector<std::size_t> euclidean_widths{16};
  std::vector<std::size_t> hyperbolic_widths{16};
  std::size_t num_classes = 3;
  double initial_c = 1.0;
  double learning_rate = 0.2;
  double c_min = 1e-4;
  std::uint64_t seed = 0;
  AggregationSource aggregation_source = AggregationSource::pairwise;
  Space space = Space::dual;
  Activation activation = Activation::relu;
  bool learn_curvature = true;
  /// After the hyperbolic stage, fuse every node with its graph neighbours'
  /// embeddings from the input of that stage.
  bool cross_layer_fusion = false;
  std::size_t phase1_epochs = 15;
  std::size_t phase2_epochs = 35;
  std::size_t batch_size = 4;
  double gradient_clip = 5.0;  ///< max global gradient norm per step, 0 disables

  void validate() const;
};

enum class ParamKind {
  euclidean_weight,
  euclidean_bias,
  hyperbolic_weight,
  hyperbolic_bias,
  curvature,
  classifier_weight,
  classifier_bias,
};

struct ParamBlock {
  std::string name;
  ParamKind kind;
  std::size_t layer = 0;
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
};

/// Flat parameter layout shared by the double and ad::Var forward passes.
struct ParamLayout {
  std::vector<ParamBlock> blocks;
  std::size_t total = 0;

  static ParamLayout build(const NetworkConfig& cfg);
  const ParamBlock& find(ParamKind kind, std::size_t layer) const;
  /// Index of curvature l in the flat vector (l = 0 is the embedding curvature).
  std::size_t curvature_index(std::size_t l) const;
};

/// Per-window network input.
struct GraphInput {
  NodeRows<double> features;
  AggregationMatrix local;   ///< pairwise, used by the Euclidean stage
  AggregationMatrix global;  ///< per aggregation_source, used by the second stage
  SparseAdjacency neighbors; ///< for cross-layer fusion
};

struct Model {
  NetworkConfig config;
  ParamLayout layout;
  std::vector<double> params;

  /// Uniform(-1/sqrt(d_in), 1/sqrt(d_in)) weights, zero biases, c = initial_c.
  static Model initialize(const NetworkConfig& cfg);

  std::size_t hyperbolic_depth() const { return config.hyperbolic_widths.size(); }
  std::vector<double> curvatures() const;
  std::span<const double> block(ParamKind kind, std::size_t layer) const;
};

/// Forward pass up to the logits. Throws NumericError naming the layer whose
/// output stops being finite.
template <typename T>
std::vector<T> forward(const NetworkConfig& cfg, const ParamLayout& layout,
                       std::span<const T> params, const GraphInput& in) {
  auto mat = [&](ParamKind kind, std::size_t l) {
    const auto& b = layout.find(kind, l);
    return MatrixView<T>{params.subspan(b.offset, b.size()), b.rows, b.cols};
  };
  auto vec = [&](ParamKind kind, std::size_t l) {
    const auto& b = layout.find(kind, l);
    return params.subspan(b.offset, b.size());
  };
  auto check = [](const NodeRows<T>& rows, const std::string& where) {
    for (const auto& r : rows) {
      for (const auto& v : r) {
        if (!std::isfinite(ad::value(v))) throw NumericError(where + " produced a non-finite value");
      }
    }
  };
  if (in.features.empty()) throw ParameterError("no events to classify");

  NodeRows<T> x(in.features.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i].assign(in.features[i].begin(), in.features[i].end());

  for (std::size_t l = 0; l < cfg.euclidean_widths.size(); ++l) {
    x = euclidean_gcn_layer(x, in.local, mat(ParamKind::euclidean_weight, l),
                            vec(ParamKind::euclidean_bias, l), cfg.activation);
    check(x, "euclidean layer " + std::to_string(l));
  }

  const auto& wout = layout.find(ParamKind::classifier_weight, 0);
  const MatrixView<T> classifier{params.subspan(wout.offset, wout.size()), wout.rows, wout.cols};
  const auto bias_out = vec(ParamKind::classifier_bias, 0);

  if (cfg.space == Space::euclidean) {
    for (std::size_t l = 0; l < cfg.hyperbolic_widths.size(); ++l) {
      x = euclidean_gcn_layer(x, in.global, mat(ParamKind::hyperbolic_weight, l),
                              vec(ParamKind::hyperbolic_bias, l), cfg.activation);
      check(x, "second-stage euclidean layer " + std::to_string(l));
    }
    return readout_classify<T>(x, classifier, bias_out, nullptr);
  }

  auto curv = [&](std::size_t l) { return params[layout.curvature_index(l)]; };
  const T c0 = curv(0);
  NodeRows<T> h = to_hyperbolic(x, c0);
  const NodeRows<T> stage_input = h;
  check(h, "hyperbolic embedding");
  for (std::size_t l = 0; l < cfg.hyperbolic_widths.size(); ++l) {
    const std::string where = "hyperbolic layer " + std::to_string(l);
    try {
      h = hyperbolic_layer(h, in.global, mat(ParamKind::hyperbolic_weight, l),
                           vec(ParamKind::hyperbolic_bias, l), curv(l), curv(l + 1), cfg.activation);
    } catch (const DomainError& e) {
      // A NaN escaping the ball surfaces as a failed log map.
      throw NumericError(where + ": " + e.what());
    }
    check(h, where);
  }
  const T c_last = curv(cfg.hyperbolic_widths.size());
  if (cfg.cross_layer_fusion) {
    // Neighbour embeddings are moved to the last curvature through the tangent space.
    NodeRows<T> fused(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      NodeRows<T> nbrs;
      for (auto j : in.neighbors.rows[i]) {
        if (j == i) continue;
        const auto& p = stage_input[j];
        if (p.size() != h[i].size()) throw ParameterError("fusion needs equal stage widths");
        nbrs.push_back(hyperbolic::exp_map_origin(hyperbolic::log_map_origin(p, c0), c_last));
      }
      fused[i] = mobius_fusion(h[i], nbrs, c_last);
    }
    h = std::move(fused);
    check(h, "cross-layer fusion");
  }
  return readout_classify<T>(h, classifier, bias_out, &c_last);
}

std::vector<double> predict_logits(const Model& model, const GraphInput& in);
std::size_t predict(const Model& model, const GraphInput& in);

struct GradientResult {
  double loss = 0.0;
  std::vector<double> logits;
  std::vector<double> grad;  ///< aligned with Model::params
};

/// Reverse-mode gradient of the cross-entropy loss for one window.
GradientResult gradients(const Model& model, const GraphInput& in, std::size_t label);

/// Loss of the model with parameters replaced by `params`.
double loss_at(const Model& model, std::span<const double> params, const GraphInput& in,
               std::size_t label);

/// max(c - lr * grad, c_min).
double curvature_step(double c, double grad, double lr, double c_min);

// ---------------------------------------------------------------------------
// Training

struct TrainingExample {
  GraphInput input;
  std::size_t label = 0;
};

struct TraceRow {
  std::size_t step = 0;  ///< epoch, 1-based
  int phase = 1;
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> curvatures;
};

struct TrainResult {
  Model model;
  std::vector<TraceRow> trace;
};

/// Two-phase mini-batch SGD. Phase 1 updates the Euclidean stage and the
/// classifier; phase 2 also updates the second stage and the curvatures.
/// Per-example gradients may run on several threads (EHG_THREADS); they are
/// summed in example order, so results do not depend on the thread count.
TrainResult train(const std::vector<TrainingExample>& data, const NetworkConfig& cfg);

double accuracy(const Model& model, const std::vector<TrainingExample>& data);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

// ---------------------------------------------------------------------------
// FLOP accounting

struct WindowStats {
  std::size_t nodes = 0;
  std::size_t local_nnz = 0;   ///< non-zeros of the Euclidean-stage aggregation
  std::size_t global_nnz = 0;  ///< non-zeros of the second-stage aggregation
  std::size_t hyperedges = 0;
};

struct LayerFlops {
  std::string name;
  std::uint64_t linear = 0;
  std::uint64_t aggregation = 0;
  std::uint64_t maps = 0;

  std::uint64_t total() const { return linear + aggregation + maps; }
};

struct FlopReport {
  std::vector<LayerFlops> layers;
  std::uint64_t total = 0;
  double per_event = 0.0;
};

/// Counting convention: 2 d_in d_out per node for every dense or Mobius
/// matrix product, 2 nnz(A) d for every aggregation, and 6 d per node for
/// every exp/log map, Mobius addition, or activation.
FlopReport estimate_flops(const NetworkConfig& cfg, const WindowStats& stats);

}  // namespace ehg
