#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gifs/point_set.hpp"

namespace gifs {

/// Exact nearest-neighbor queries against a fixed PointSet. Binary search in
/// one dimension, a uniform cell grid in two and three, a linear scan above.
/// The indexed set must outlive the index.
class NearestIndex {
 public:
  struct Hit {
    double dist2 = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
  };

  explicit NearestIndex(const PointSet& set) : set_(&set), dim_(set.dim()) {
    if (dim_ >= 2 && dim_ <= 3 && set.size() > 32) build_grid();
  }

  /// Nearest point to q. When `good_enough2` >= 0 the search may stop as soon
  /// as any candidate within sqrt(good_enough2) is found.
  Hit nearest(std::span<const double> q, double good_enough2 = -1.0) const {
    if (dim_ == 1) return nearest_1d(q[0]);
    if (!cells_.empty()) return nearest_grid(q, good_enough2);
    Hit best;
    for (std::size_t i = 0; i < set_->size(); ++i) {
      const double d2 = squared_distance((*set_)[i], q);
      if (d2 < best.dist2) {
        best = {d2, i};
        if (d2 <= good_enough2) break;
      }
    }
    return best;
  }

 private:
  Hit nearest_1d(double x) const {
    const auto c = set_->coords();
    const auto it = std::lower_bound(c.begin(), c.end(), x);
    Hit best;
    if (it != c.end()) best = {(*it - x) * (*it - x), static_cast<std::size_t>(it - c.begin())};
    if (it != c.begin()) {
      const auto prev = it - 1;
      const double d2 = (*prev - x) * (*prev - x);
      if (d2 <= best.dist2) best = {d2, static_cast<std::size_t>(prev - c.begin())};
    }
    return best;
  }

  void build_grid() {
    const auto box = set_->bbox();
    double extent = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) extent = std::max(extent, box.hi[k] - box.lo[k]);
    const double per_axis = std::ceil(std::pow(static_cast<double>(set_->size()), 1.0 / static_cast<double>(dim_)));
    cell_ = extent > 0.0 ? extent / per_axis : 1.0;
    origin_ = box.lo;
    shape_.resize(dim_);
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim_; ++k) {
      shape_[k] = static_cast<std::int64_t>(std::floor((box.hi[k] - box.lo[k]) / cell_)) + 1;
      total *= static_cast<std::size_t>(shape_[k]);
    }
    std::vector<std::size_t> cell_of(set_->size());
    std::vector<std::size_t> counts(total + 1, 0);
    for (std::size_t i = 0; i < set_->size(); ++i) {
      cell_of[i] = linear(cell_coords((*set_)[i]));
      ++counts[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) counts[c + 1] += counts[c];
    cells_ = counts;
    members_.resize(set_->size());
    for (std::size_t i = 0; i < set_->size(); ++i) members_[counts[cell_of[i]]++] = i;
  }

  std::vector<std::int64_t> cell_coords(std::span<const double> p) const {
    std::vector<std::int64_t> c(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      const double t = std::floor((p[k] - origin_[k]) / cell_);
      c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::clamp(t, -1e15, 1e15)), 0, shape_[k] - 1);
    }
    return c;
  }

  std::size_t linear(const std::vector<std::int64_t>& c) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dim_; ++k) idx = idx * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(c[k]);
    return idx;
  }

  Hit nearest_grid(std::span<const double> q, double good_enough2) const {
    const auto center = cell_coords(q);
    std::int64_t max_ring = 0;
    for (std::size_t k = 0; k < dim_; ++k)
      max_ring = std::max({max_ring, center[k], shape_[k] - 1 - center[k]});

    Hit best;
    std::vector<std::int64_t> c(dim_);
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      // Visit cells at Chebyshev distance exactly r from the center cell.
      std::vector<std::int64_t> lo(dim_), hi(dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        lo[k] = std::max<std::int64_t>(0, center[k] - r);
        hi[k] = std::min<std::int64_t>(shape_[k] - 1, center[k] + r);
      }
      c = lo;
      while (true) {
        std::int64_t cheb = 0;
        for (std::size_t k = 0; k < dim_; ++k) cheb = std::max(cheb, std::abs(c[k] - center[k]));
        if (cheb == r) {
          const std::size_t id = linear(c);
          for (std::size_t m = cells_[id]; m < cells_[id + 1]; ++m) {
            const std::size_t i = members_[m];
            const double d2 = squared_distance((*set_)[i], q);
            if (d2 < best.dist2 || (d2 == best.dist2 && i < best.index)) {
              best = {d2, i};
              if (d2 <= good_enough2) return best;
            }
          }
        }
        std::size_t k = dim_;
        while (k-- > 0) {
          if (c[k] < hi[k]) {
            ++c[k];
            break;
          }
          c[k] = lo[k];
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
      // Anything in ring r+1 or beyond is at least r*cell away.
      const double reach = static_cast<double>(r) * cell_;
      if (best.dist2 <= reach * reach) break;
    }
    return best;
  }

  const PointSet* set_;
  std::size_t dim_;
  double cell_ = 1.0;
  std::vector<double> origin_;
  std::vector<std::int64_t> shape_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> members_;
};

}  // namespace gifs
