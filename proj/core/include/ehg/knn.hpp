#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ehg/events.hpp"

namespace ehg {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  }
};

/// Maps events to (x, y, time_scale * t) so one Euclidean metric covers space and time.
std::vector<Point3> embed_events(const std::vector<Event>& events, double time_scale);

/// Exact k-nearest-neighbour search over a uniform grid. Results are ordered by
/// (distance, index), so they match a brute-force scan exactly, ties included.
/// Below `brute_force_limit` points the grid is skipped.
class KnnIndex {
 public:
  static constexpr std::size_t kBruteForceLimit = 1000;

  explicit KnnIndex(std::vector<Point3> points, std::size_t brute_force_limit = kBruteForceLimit);

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// k nearest points other than `self` (fewer when the index is small).
  std::vector<Neighbor> query(std::size_t self, std::size_t k) const;

  /// Nearest point j != self with accept(j) true.
  std::optional<Neighbor> nearest_if(std::size_t self,
                                     const std::function<bool(std::uint32_t)>& accept) const;

 private:
  /// Visits grid cells ring by ring around `self`. `visit` sees every
  /// candidate index; `done(r)` is asked after ring r whether unvisited points
  /// (all at distance >= r * cell) can still matter.
  template <typename Visit, typename Done>
  void ring_search(std::size_t self, Visit&& visit, Done&& done) const;

  std::vector<Point3> points_;
  bool use_grid_ = false;
  double cell_ = 1.0;
  Point3 origin_;
  std::int64_t nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::uint32_t> cell_start_;  // CSR over cells
  std::vector<std::uint32_t> cell_items_;

  std::int64_t cell_coord(double v, double lo, std::int64_t n) const;
};

/// Reference O(n^2) search with identical ordering; used by tests.
std::vector<Neighbor> brute_force_knn(const std::vector<Point3>& points, std::size_t self,
                                      std::size_t k);

}  // namespace ehg
