#include "ehg/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ehg/error.hpp"
#include "ehg/knn.hpp"

namespace ehg {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0U);
  }

  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace

void MvfConfig::validate() const {
  if (!(sigma_v > 0.0)) throw ParameterError("sigma_v must be positive");
  if (!(sigma_s > 0.0)) throw ParameterError("sigma_s must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  if (candidate_k < 1) throw ParameterError("candidate_k must be >= 1");
}

std::size_t SparseAdjacency::nnz() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.size();
  return n;
}

bool SparseAdjacency::contains(std::uint32_t i, std::uint32_t j) const {
  return std::binary_search(rows[i].begin(), rows[i].end(), j);
}

std::vector<MotionFeature> motion_features(const SampledStream& sampled) {
  const auto& events = sampled.retained();
  std::vector<MotionFeature> out(events.size());
  if (events.size() < 2) return out;

  const KnnIndex index(embed_events(events, sampled.time_scale));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto ti = events[i].t;
    // Stream order puts every earlier event before i.
    const auto prev = index.nearest_if(i, [&](std::uint32_t j) { return events[j].t < ti; });
    if (!prev) continue;
    const auto& a = index.point(i);
    const auto& b = index.point(prev->index);
    auto& f = out[i];
    f.v = {a.x - b.x, a.y - b.y, a.z - b.z};
    f.s = std::sqrt(f.v[0] * f.v[0] + f.v[1] * f.v[1] + f.v[2] * f.v[2]);
    if (!(f.s > 0.0)) continue;
    for (int d = 0; d < 3; ++d) f.direction[d] = f.v[d] / f.s;
    f.valid = true;
  }
  return out;
}

double transition_prob(const MotionFeature& fi, const MotionFeature& fj, const MvfConfig& cfg) {
  if (!fi.valid || !fj.valid) throw DomainError("transition_prob needs two valid motion features");
  double dir2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double diff = fj.direction[d] - fi.direction[d];
    dir2 += diff * diff;
  }
  return std::exp(-dir2 / (2.0 * cfg.sigma_v * cfg.sigma_v) - std::abs(fj.s - fi.s) / cfg.sigma_s);
}

Hypergraph build_hyperedges(const std::vector<MotionFeature>& features,
                            const SampledStream& sampled, const MvfConfig& cfg) {
  cfg.validate();
  const auto& events = sampled.retained();
  if (features.size() != events.size()) {
    throw ParameterError("motion features are not aligned with the sampled events");
  }
  Hypergraph g;
  g.vertices = events;
  g.config = cfg;
  g.incidence.resize(events.size());

  std::vector<std::uint32_t> valid;
  for (std::uint32_t i = 0; i < events.size(); ++i) {
    if (features[i].valid) valid.push_back(i);
  }
  if (valid.size() < 2) return g;

  std::vector<Point3> pts;
  pts.reserve(valid.size());
  const auto all = embed_events(events, sampled.time_scale);
  for (auto v : valid) pts.push_back(all[v]);
  const KnnIndex index(std::move(pts));

  DisjointSets sets(events.size());
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> scored;
  for (std::size_t a = 0; a < valid.size(); ++a) {
    for (const auto& nb : index.query(a, cfg.candidate_k)) {
      const std::uint32_t i = valid[a];
      const std::uint32_t j = valid[nb.index];
      const auto key = std::minmax(i, j);
      if (scored.count(key)) continue;
      const double gam = transition_prob(features[i], features[j], cfg);
      scored.emplace(key, gam);
      if (gam > cfg.gamma) sets.unite(i, j);
    }
  }
  for (const auto& [key, gam] : scored) {
    if (gam > cfg.gamma) g.links.push_back({key.first, key.second, gam});
  }

  std::map<std::uint32_t, std::vector<std::uint32_t>> components;
  for (auto v : valid) components[sets.find(v)].push_back(v);
  for (auto& [root, members] : components) {
    if (members.size() >= 2) g.hyperedges.push_back(std::move(members));
  }
  std::sort(g.hyperedges.begin(), g.hyperedges.end());
  for (std::uint32_t h = 0; h < g.hyperedges.size(); ++h) {
    for (auto v : g.hyperedges[h]) g.incidence[v].push_back(h);
  }
  return g;
}

SparseAdjacency build_pairwise_graph(const SampledStream& sampled, std::size_t k) {
  const auto& events = sampled.retained();
  SparseAdjacency adj;
  adj.rows.resize(events.size());
  for (std::uint32_t i = 0; i < events.size(); ++i) adj.rows[i].push_back(i);
  if (events.size() >= 2 && k > 0) {
    const KnnIndex index(embed_events(events, sampled.time_scale));
    for (std::uint32_t i = 0; i < events.size(); ++i) {
      for (const auto& nb : index.query(i, k)) {
        adj.rows[i].push_back(nb.index);
        adj.rows[nb.index].push_back(i);
      }
    }
  }
  for (auto& row : adj.rows) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

GraphFeatures init_features(const SampledStream& sampled, const SparseAdjacency& adjacency) {
  const auto& events = sampled.retained();
  const auto& win = sampled.window;
  const double m = static_cast<double>(events.size());
  const double w = static_cast<double>(win.sensor.width);
  const double h = static_cast<double>(win.sensor.height);
  const double span = static_cast<double>(std::max<std::int64_t>(win.duration(), 1));

  GraphFeatures f;
  f.nodes.reserve(events.size());
  // Events are in stream order, so the temporal rank is the position + 1.
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    f.nodes.push_back({static_cast<double>(e.p), static_cast<double>(i + 1) / m,
                       static_cast<double>(e.x) / w, static_cast<double>(e.y) / h});
  }
  for (std::uint32_t i = 0; i < adjacency.size(); ++i) {
    for (auto j : adjacency.rows[i]) {
      const auto& a = events[i];
      const auto& b = events[j];
      f.edges.push_back({i, j,
                         {static_cast<double>(b.x - a.x) / w, static_cast<double>(b.y - a.y) / h,
                          static_cast<double>(b.t - a.t) / span}});
    }
  }
  return f;
}

std::vector<double> hyperedge_purity(const Hypergraph& graph, const std::vector<int>& labels) {
  if (labels.size() != graph.num_vertices()) {
    throw ParameterError("label count does not match the vertex count");
  }
  std::vector<double> purity;
  purity.reserve(graph.num_hyperedges());
  for (const auto& edge : graph.hyperedges) {
    std::map<int, std::size_t> counts;
    std::size_t best = 0;
    for (auto v : edge) best = std::max(best, ++counts[labels[v]]);
    purity.push_back(static_cast<double>(best) / static_cast<double>(edge.size()));
  }
  return purity;
}

std::optional<double> mean_purity(const Hypergraph& graph, const std::vector<int>& labels) {
  const auto p = hyperedge_purity(graph, labels);
  if (p.empty()) return std::nullopt;
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

void write_hypergraph_jsonl(std::ostream& out, const Hypergraph& graph,
                            std::optional<std::size_t> window) {
  nlohmann::ordered_json header = {{"M", graph.num_vertices()},
                                   {"zeta", graph.num_hyperedges()},
                                   {"gamma", graph.config.gamma},
                                   {"sigma_v", graph.config.sigma_v},
                                   {"sigma_s", graph.config.sigma_s}};
  if (window) header["window"] = *window;
  out << header.dump() << '\n';
  for (const auto& edge : graph.hyperedges) out << nlohmann::json(edge).dump() << '\n';
}

}  // namespace ehg
