#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehg/sampling.hpp"

namespace ehg {

/// Displacement from an event to its nearest strictly-earlier neighbour in
/// (x, y, scale * t), together with its magnitude and direction.
struct MotionFeature {
  std::array<double, 3> v{};          ///< (dx, dy, scale * dt)
  double s = 0.0;                     ///< |v|
  std::array<double, 3> direction{};  ///< v / s
  bool valid = false;                 ///< false when no earlier neighbour exists
};

struct MvfConfig {
  double sigma_v = 0.5;  ///< direction tolerance
  double sigma_s = 2.0;  ///< intensity tolerance
  double gamma = 0.5;    ///< link threshold; values >= 1 produce no links
  std::size_t candidate_k = 8;

  void validate() const;
};

/// Symmetric neighbour lists, sorted, each row containing its own index.
struct SparseAdjacency {
  std::vector<std::vector<std::uint32_t>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t nnz() const;
  bool contains(std::uint32_t i, std::uint32_t j) const;
};

/// A pair that was scored and passed the threshold.
struct ScoredLink {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double gamma = 0.0;
};

struct EdgeFeature {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::array<double, 3> delta{};  ///< (dx / width, dy / height, dt / window length)
};

/// Node features [p, rank(t) / M, x / width, y / height] and edge features
/// for every adjacency entry.
struct GraphFeatures {
  std::vector<std::array<double, 4>> nodes;
  std::vector<EdgeFeature> edges;
};

struct Hypergraph {
  std::vector<Event> vertices;
  std::vector<std::vector<std::uint32_t>> hyperedges;  ///< sorted members, >= 2 each
  std::vector<std::vector<std::uint32_t>> incidence;   ///< vertex -> hyperedge ids
  std::vector<ScoredLink> links;
  GraphFeatures features;
  MvfConfig config;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_hyperedges() const { return hyperedges.size(); }
};

std::vector<MotionFeature> motion_features(const SampledStream& sampled);

/// exp(-|dir_j - dir_i|^2 / (2 sigma_v^2) - |s_j - s_i| / sigma_s).
/// Throws DomainError when either feature is invalid.
double transition_prob(const MotionFeature& fi, const MotionFeature& fj, const MvfConfig& cfg);

/// Links each valid event to those of its candidate_k nearest valid
/// neighbours whose score exceeds gamma; hyperedges are the connected
/// components of that relation with at least two members.
Hypergraph build_hyperedges(const std::vector<MotionFeature>& features,
                            const SampledStream& sampled, const MvfConfig& cfg);

/// Symmetrized k-NN graph with self loops.
SparseAdjacency build_pairwise_graph(const SampledStream& sampled, std::size_t k);

GraphFeatures init_features(const SampledStream& sampled, const SparseAdjacency& adjacency);

/// Fraction of members sharing the majority label, per hyperedge.
std::vector<double> hyperedge_purity(const Hypergraph& graph, const std::vector<int>& labels);
/// Mean of hyperedge_purity, or nullopt when there are no hyperedges.
std::optional<double> mean_purity(const Hypergraph& graph, const std::vector<int>& labels);

/// Header line {"M", "zeta", "gamma", "sigma_v", "sigma_s"[, "window"]}, then one
/// JSON array of sorted vertex indices per hyperedge.
void write_hypergraph_jsonl(std::ostream& out, const Hypergraph& graph,
                            std::optional<std::size_t> window = std::nullopt);

}  // namespace ehg
