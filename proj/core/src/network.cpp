#include "ehg/network.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>

#include "ehg/parallel.hpp"
#include "ehg/random.hpp"

namespace ehg {

std::size_t AggregationMatrix::nnz() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.size();
  return n;
}

double AggregationMatrix::at(std::uint32_t r, std::uint32_t c) const {
  const auto& row = rows[r];
  auto it = std::lower_bound(row.begin(), row.end(), c,
                             [](const Entry& e, std::uint32_t col) { return e.col < col; });
  return it != row.end() && it->col == c ? it->weight : 0.0;
}

AggregationMatrix AggregationMatrix::identity(std::size_t n) {
  AggregationMatrix a;
  a.rows.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) a.rows[i].push_back({i, 1.0});
  return a;
}

AggregationMatrix normalize_adjacency(const SparseAdjacency& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw ParameterError("cannot normalize an empty vertex set");
  std::vector<std::vector<std::uint32_t>> rows = adjacency.rows;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!std::binary_search(rows[i].begin(), rows[i].end(), i)) {
      rows[i].insert(std::lower_bound(rows[i].begin(), rows[i].end(), i), i);
    }
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(rows[i].size()));
  AggregationMatrix a;
  a.rows.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (auto j : rows[i]) a.rows[i].push_back({j, inv_sqrt_deg[i] * inv_sqrt_deg[j]});
  }
  return a;
}

AggregationMatrix normalize_hypergraph(const Hypergraph& graph) {
  const std::size_t n = graph.num_vertices();
  if (n == 0) throw ParameterError("cannot normalize an empty vertex set");
  std::vector<double> vertex_deg(n, 0.0);
  for (const auto& edge : graph.hyperedges) {
    for (auto v : edge) vertex_deg[v] += 1.0;
  }
  std::vector<std::map<std::uint32_t, double>> acc(n);
  for (const auto& edge : graph.hyperedges) {
    const double inv_edge = 1.0 / static_cast<double>(edge.size());
    for (auto i : edge) {
      for (auto j : edge) {
        acc[i][j] += inv_edge / std::sqrt(vertex_deg[i] * vertex_deg[j]);
      }
    }
  }
  AggregationMatrix a;
  a.rows.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (vertex_deg[i] == 0.0) {
      a.rows[i].push_back({i, 1.0});
      continue;
    }
    for (const auto& [j, w] : acc[i]) a.rows[i].push_back({j, w});
  }
  return a;
}

AggregationMatrix mean_aggregation(const AggregationMatrix& a, const AggregationMatrix& b) {
  if (a.size() != b.size()) throw ParameterError("aggregation matrices differ in size");
  AggregationMatrix out;
  out.rows.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::map<std::uint32_t, double> row;
    for (const auto& e : a.rows[i]) row[e.col] += 0.5 * e.weight;
    for (const auto& e : b.rows[i]) row[e.col] += 0.5 * e.weight;
    for (const auto& [j, w] : row) out.rows[i].push_back({j, w});
  }
  return out;
}

NodeRows<double> hyperbolic_layer(const NodeRows<double>& h, const AggregationMatrix& a,
                                  const LayerParams& p) {
  return hyperbolic_layer<double>(h, a, p.w.view(), p.b, p.c_in, p.c_out, p.activation);
}

double loss(const std::vector<double>& logits, std::size_t label) {
  return cross_entropy(logits, label);
}

void NetworkConfig::validate() const {
  if (euclidean_widths.empty() || hyperbolic_widths.empty()) {
    throw ParameterError("network needs at least one layer of each kind");
  }
  for (auto w : euclidean_widths) {
    if (w < 1) throw ParameterError("layer widths must be >= 1");
  }
  for (auto w : hyperbolic_widths) {
    if (w < 1) throw ParameterError("layer widths must be >= 1");
  }
  if (input_dim < 1) throw ParameterError("input_dim must be >= 1");
  if (num_classes < 2) throw ParameterError("num_classes must be >= 2");
  if (!(initial_c > 0.0)) throw ParameterError("initial curvature must be positive");
  if (!(c_min > 0.0)) throw ParameterError("c_min must be positive");
  if (!(learning_rate >= 0.0)) throw ParameterError("learning rate must be non-negative");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (cross_layer_fusion && euclidean_widths.back() != hyperbolic_widths.back()) {
    throw ParameterError("cross-layer fusion needs equal last widths in both stages");
  }
}

ParamLayout ParamLayout::build(const NetworkConfig& cfg) {
  ParamLayout layout;
  auto add = [&](std::string name, ParamKind kind, std::size_t layer, std::size_t rows,
                 std::size_t cols) {
    layout.blocks.push_back({std::move(name), kind, layer, rows, cols, layout.total});
    layout.total += rows * cols;
  };
  std::size_t d = cfg.input_dim;
  for (std::size_t l = 0; l < cfg.euclidean_widths.size(); ++l) {
    const auto out = cfg.euclidean_widths[l];
    add("euclidean." + std::to_string(l) + ".W", ParamKind::euclidean_weight, l, out, d);
    add("euclidean." + std::to_string(l) + ".b", ParamKind::euclidean_bias, l, out, 1);
    d = out;
  }
  for (std::size_t l = 0; l < cfg.hyperbolic_widths.size(); ++l) {
    const auto out = cfg.hyperbolic_widths[l];
    add("hyperbolic." + std::to_string(l) + ".W", ParamKind::hyperbolic_weight, l, out, d);
    add("hyperbolic." + std::to_string(l) + ".b", ParamKind::hyperbolic_bias, l, out, 1);
    d = out;
  }
  if (cfg.space == Space::dual) {
    for (std::size_t l = 0; l <= cfg.hyperbolic_widths.size(); ++l) {
      add("curvature." + std::to_string(l), ParamKind::curvature, l, 1, 1);
    }
  }
  add("classifier.W", ParamKind::classifier_weight, 0, cfg.num_classes, d);
  add("classifier.b", ParamKind::classifier_bias, 0, cfg.num_classes, 1);
  return layout;
}

const ParamBlock& ParamLayout::find(ParamKind kind, std::size_t layer) const {
  for (const auto& b : blocks) {
    if (b.kind == kind && b.layer == layer) return b;
  }
  throw ParameterError("parameter block not present in this layout");
}

std::size_t ParamLayout::curvature_index(std::size_t l) const {
  return find(ParamKind::curvature, l).offset;
}

Model Model::initialize(const NetworkConfig& cfg) {
  cfg.validate();
  Model m;
  m.config = cfg;
  m.layout = ParamLayout::build(cfg);
  m.params.assign(m.layout.total, 0.0);
  Rng rng(derive_seed(cfg.seed, "init"));
  for (const auto& b : m.layout.blocks) {
    switch (b.kind) {
      case ParamKind::euclidean_weight:
      case ParamKind::hyperbolic_weight:
      case ParamKind::classifier_weight: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(b.cols));
        for (std::size_t i = 0; i < b.size(); ++i) m.params[b.offset + i] = rng.uniform(-bound, bound);
        break;
      }
      case ParamKind::curvature:
        m.params[b.offset] = cfg.initial_c;
        break;
      default:
        break;
    }
  }
  return m;
}

std::vector<double> Model::curvatures() const {
  std::vector<double> c;
  for (const auto& b : layout.blocks) {
    if (b.kind == ParamKind::curvature) c.push_back(params[b.offset]);
  }
  return c;
}

std::span<const double> Model::block(ParamKind kind, std::size_t layer) const {
  const auto& b = layout.find(kind, layer);
  return std::span<const double>(params).subspan(b.offset, b.size());
}

std::vector<double> predict_logits(const Model& model, const GraphInput& in) {
  return forward<double>(model.config, model.layout, model.params, in);
}

std::size_t predict(const Model& model, const GraphInput& in) {
  const auto logits = predict_logits(model, in);
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

GradientResult gradients(const Model& model, const GraphInput& in, std::size_t label) {
  ad::Tape tape;
  ad::ScopedTape scope(tape);
  std::vector<ad::Var> vars;
  vars.reserve(model.params.size());
  for (double p : model.params) vars.push_back(ad::Var::independent(p));

  const auto logits = forward<ad::Var>(model.config, model.layout, vars, in);
  const ad::Var l = cross_entropy(logits, label);
  if (!std::isfinite(l.value())) throw NumericError("loss is not finite");

  GradientResult r;
  r.loss = l.value();
  for (const auto& z : logits) r.logits.push_back(z.value());
  r.grad.assign(model.params.size(), 0.0);
  if (!l.constant()) {
    const auto adj = tape.adjoints(l.index());
    for (std::size_t i = 0; i < vars.size(); ++i) r.grad[i] = adj[vars[i].index()];
  }
  return r;
}

double loss_at(const Model& model, std::span<const double> params, const GraphInput& in,
               std::size_t label) {
  return cross_entropy(forward<double>(model.config, model.layout, params, in), label);
}

double curvature_step(double c, double grad, double lr, double c_min) {
  return std::max(c - lr * grad, c_min);
}

namespace {

bool trainable(ParamKind kind, int phase, const NetworkConfig& cfg) {
  switch (kind) {
    case ParamKind::euclidean_weight:
    case ParamKind::euclidean_bias:
    case ParamKind::classifier_weight:
    case ParamKind::classifier_bias:
      return true;
    case ParamKind::hyperbolic_weight:
    case ParamKind::hyperbolic_bias:
      return phase == 2;
    case ParamKind::curvature:
      return phase == 2 && cfg.learn_curvature;
  }
  return false;
}

}  // namespace

TrainResult train(const std::vector<TrainingExample>& data, const NetworkConfig& cfg) {
  cfg.validate();
  {
    std::vector<bool> seen(cfg.num_classes, false);
    for (const auto& ex : data) {
      if (ex.label >= cfg.num_classes) throw ParameterError("label exceeds num_classes");
      seen[ex.label] = true;
    }
    if (std::count(seen.begin(), seen.end(), true) < 2) {
      throw ParameterError("training needs at least two classes present");
    }
  }

  TrainResult result{Model::initialize(cfg), {}};
  Model& model = result.model;
  Rng rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> example_loss(data.size());
  std::vector<char> example_correct(data.size());
  const std::size_t epochs = cfg.phase1_epochs + cfg.phase2_epochs;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const int phase = epoch <= cfg.phase1_epochs ? 1 : 2;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      std::vector<GradientResult> slots(count);
      parallel_for(count, [&](std::size_t k) {
        const auto& ex = data[order[start + k]];
        slots[k] = gradients(model, ex.input, ex.label);
      });

      std::vector<double> grad(model.params.size(), 0.0);
      for (std::size_t k = 0; k < count; ++k) {
        const auto idx = order[start + k];
        example_loss[idx] = slots[k].loss;
        const auto& z = slots[k].logits;
        example_correct[idx] =
            static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin()) == data[idx].label;
        for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += slots[k].grad[p];
      }
      double norm2 = 0.0;
      for (auto& g : grad) {
        g /= static_cast<double>(count);
        norm2 += g * g;
      }
      double scale = 1.0;
      if (cfg.gradient_clip > 0.0 && std::sqrt(norm2) > cfg.gradient_clip) {
        scale = cfg.gradient_clip / std::sqrt(norm2);
      }
      for (const auto& b : model.layout.blocks) {
        if (!trainable(b.kind, phase, cfg)) continue;
        for (std::size_t i = b.offset; i < b.offset + b.size(); ++i) {
          if (b.kind == ParamKind::curvature) {
            model.params[i] = curvature_step(model.params[i], scale * grad[i], cfg.learning_rate, cfg.c_min);
          } else {
            model.params[i] -= cfg.learning_rate * scale * grad[i];
          }
        }
      }
    }

    TraceRow row;
    row.step = epoch;
    row.phase = phase;
    double total = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      total += example_loss[i];
      correct += example_correct[i] ? 1 : 0;
    }
    row.loss = data.empty() ? 0.0 : total / static_cast<double>(data.size());
    row.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
    row.curvatures = model.curvatures();
    if (!std::isfinite(row.loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (loss is NaN)");
    }
    result.trace.push_back(std::move(row));
  }
  return result;
}

double accuracy(const Model& model, const std::vector<TrainingExample>& data) {
  if (data.empty()) return 0.0;
  std::vector<char> correct(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    correct[i] = predict(model, data[i].input) == data[i].label;
  });
  return static_cast<double>(std::count(correct.begin(), correct.end(), 1)) /
         static_cast<double>(data.size());
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "step,phase,loss,accuracy";
  const std::size_t nc = trace.empty() ? 0 : trace.front().curvatures.size();
  for (std::size_t l = 0; l < nc; ++l) out << ",c" << l;
  out << '\n' << std::setprecision(17);
  for (const auto& r : trace) {
    out << r.step << ',' << r.phase << ',' << r.loss << ',' << r.accuracy;
    for (double c : r.curvatures) out << ',' << c;
    out << '\n';
  }
}

FlopReport estimate_flops(const NetworkConfig& cfg, const WindowStats& stats) {
  FlopReport report;
  if (stats.nodes == 0) return report;
  using U = std::uint64_t;
  const U m = stats.nodes;
  const U map = 6;

  U d = cfg.input_dim;
  for (std::size_t l = 0; l < cfg.euclidean_widths.size(); ++l) {
    const U out = cfg.euclidean_widths[l];
    report.layers.push_back({"euclidean." + std::to_string(l), 2 * m * d * out,
                             2 * U{stats.local_nnz} * out, map * out * m});
    d = out;
  }
  if (cfg.space == Space::euclidean) {
    for (std::size_t l = 0; l < cfg.hyperbolic_widths.size(); ++l) {
      const U out = cfg.hyperbolic_widths[l];
      report.layers.push_back({"second_stage." + std::to_string(l), 2 * m * d * out,
                               2 * U{stats.global_nnz} * out, map * out * m});
      d = out;
    }
  } else {
    report.layers.push_back({"embedding", 0, 0, map * d * m});
    for (std::size_t l = 0; l < cfg.hyperbolic_widths.size(); ++l) {
      const U out = cfg.hyperbolic_widths[l];
      LayerFlops f{"hyperbolic." + std::to_string(l), 2 * m * d * out, 2 * U{stats.global_nnz} * out, 0};
      // matvec rescale, bias exp (once), Mobius add, aggregation log + exp,
      // activation log + act + exp
      f.maps = map * out * m + map * out + map * out * m + 2 * map * out * m + 3 * map * out * m;
      report.layers.push_back(f);
      d = out;
    }
    if (cfg.cross_layer_fusion) {
      const U nbr = stats.local_nnz > m ? stats.local_nnz - m : 0;
      // per neighbour: log, exp, log (curvature transfer) + per node: exp, Mobius add
      report.layers.push_back({"fusion", 0, 2 * nbr * d, map * d * (3 * nbr + 2 * m)});
    }
  }
  LayerFlops readout{"readout", 2 * d * cfg.num_classes, 2 * m * d, 0};
  if (cfg.space == Space::dual) readout.maps = map * d * m;
  report.layers.push_back(readout);

  for (const auto& l : report.layers) report.total += l.total();
  report.per_event = static_cast<double>(report.total) / static_cast<double>(m);
  return report;
}

}  // namespace ehg
