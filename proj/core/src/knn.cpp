#include "ehg/knn.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace ehg {

std::vector<Point3> embed_events(const std::vector<Event>& events, double time_scale) {
  std::vector<Point3> pts;
  pts.reserve(events.size());
  for (const auto& e : events) {
    pts.push_back({static_cast<double>(e.x), static_cast<double>(e.y),
                   time_scale * static_cast<double>(e.t)});
  }
  return pts;
}

std::vector<Neighbor> brute_force_knn(const std::vector<Point3>& points, std::size_t self,
                                      std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j == self) continue;
    all.push_back({static_cast<std::uint32_t>(j), distance(points[self], points[j])});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end());
  all.resize(take);
  return all;
}

KnnIndex::KnnIndex(std::vector<Point3> points, std::size_t brute_force_limit)
    : points_(std::move(points)) {
  const std::size_t n = points_.size();
  use_grid_ = n >= brute_force_limit && n > 0;
  if (!use_grid_) return;

  Point3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
  Point3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};
  for (const auto& p : points_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  origin_ = lo;
  // Roughly four points per occupied cell for a uniform cloud.
  const double ex = std::max(hi.x - lo.x, 1e-9);
  const double ey = std::max(hi.y - lo.y, 1e-9);
  const double ez = std::max(hi.z - lo.z, 1e-9);
  const double max_extent = std::max({ex, ey, ez});
  double volume = 1.0;
  int axes = 0;
  for (double e : {ex, ey, ez}) {
    if (e > 1e-6 * max_extent) {
      volume *= e;
      ++axes;
    }
  }
  cell_ = std::pow(volume * 4.0 / static_cast<double>(n), 1.0 / std::max(axes, 1));
  cell_ = std::max(cell_, max_extent / 256.0);
  auto cells = [&](double e) { return static_cast<std::int64_t>(e / cell_) + 1; };
  nx_ = cells(ex);
  ny_ = cells(ey);
  nz_ = cells(ez);

  const auto total = static_cast<std::size_t>(nx_ * ny_ * nz_);
  std::vector<std::uint32_t> cell_of(n);
  cell_start_.assign(total + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points_[i];
    const auto c = (cell_coord(p.z, origin_.z, nz_) * ny_ + cell_coord(p.y, origin_.y, ny_)) * nx_ +
                   cell_coord(p.x, origin_.x, nx_);
    cell_of[i] = static_cast<std::uint32_t>(c);
    ++cell_start_[static_cast<std::size_t>(c) + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(n);
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) cell_items_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

std::int64_t KnnIndex::cell_coord(double v, double lo, std::int64_t n) const {
  const auto c = static_cast<std::int64_t>((v - lo) / cell_);
  return std::clamp<std::int64_t>(c, 0, n - 1);
}

template <typename Visit, typename Done>
void KnnIndex::ring_search(std::size_t self, Visit&& visit, Done&& done) const {
  const auto& q = points_[self];
  const std::int64_t cx = cell_coord(q.x, origin_.x, nx_);
  const std::int64_t cy = cell_coord(q.y, origin_.y, ny_);
  const std::int64_t cz = cell_coord(q.z, origin_.z, nz_);
  const std::int64_t max_r = std::max({cx, nx_ - 1 - cx, cy, ny_ - 1 - cy, cz, nz_ - 1 - cz});

  auto visit_cell = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) return;
    const auto c = static_cast<std::size_t>((z * ny_ + y) * nx_ + x);
    for (auto it = cell_start_[c]; it < cell_start_[c + 1]; ++it) {
      if (cell_items_[it] != self) visit(cell_items_[it]);
    }
  };

  for (std::int64_t r = 0; r <= max_r; ++r) {
    for (std::int64_t dz = -r; dz <= r; ++dz) {
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        const bool face = std::abs(dz) == r || std::abs(dy) == r;
        if (face) {
          for (std::int64_t dx = -r; dx <= r; ++dx) visit_cell(cx + dx, cy + dy, cz + dz);
        } else {
          visit_cell(cx - r, cy + dy, cz + dz);
          if (r > 0) visit_cell(cx + r, cy + dy, cz + dz);
        }
      }
    }
    // Points in rings beyond r are separated from q by at least r whole cells.
    if (done(static_cast<double>(r) * cell_)) return;
  }
}

std::vector<Neighbor> KnnIndex::query(std::size_t self, std::size_t k) const {
  if (!use_grid_) return brute_force_knn(points_, self, k);
  k = std::min(k, points_.size() - 1);
  if (k == 0) return {};

  std::priority_queue<Neighbor> best;  // max-heap on (distance, index)
  const auto& q = points_[self];
  ring_search(
      self,
      [&](std::uint32_t j) {
        const Neighbor cand{j, distance(q, points_[j])};
        if (best.size() < k) {
          best.push(cand);
        } else if (cand < best.top()) {
          best.pop();
          best.push(cand);
        }
      },
      [&](double bound) { return best.size() == k && best.top().distance < bound; });

  std::vector<Neighbor> out(best.size());
  for (auto i = out.size(); i-- > 0;) {
    out[i] = best.top();
    best.pop();
  }
  return out;
}

std::optional<Neighbor> KnnIndex::nearest_if(
    std::size_t self, const std::function<bool(std::uint32_t)>& accept) const {
  std::optional<Neighbor> best;
  const auto& q = points_[self];
  auto consider = [&](std::uint32_t j) {
    if (!accept(j)) return;
    const Neighbor cand{j, distance(q, points_[j])};
    if (!best || cand < *best) best = cand;
  };
  if (!use_grid_) {
    for (std::size_t j = 0; j < points_.size(); ++j) {
      if (j != self) consider(static_cast<std::uint32_t>(j));
    }
    return best;
  }
  ring_search(self, consider, [&](double bound) { return best && best->distance < bound; });
  return best;
}

}  // namespace ehg
