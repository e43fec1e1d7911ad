#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "gifs/errors.hpp"

namespace gifs {

using Point = std::vector<double>;

/// Relative factor applied to the bounding-box diagonal to obtain the
/// default deduplication radius.
inline constexpr double kDedupRelative = 1e-12;

inline bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline double squared_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = p[i] - q[i];
    s += t * t;
  }
  return s;
}

/// Euclidean distance between two points of equal dimension.
inline double distance(std::span<const double> p, std::span<const double> q) {
  require_same_dim(p.size(), q.size());
  return std::sqrt(squared_distance(p, q));
}

struct BoundingBox {
  std::vector<double> lo;
  std::vector<double> hi;

  double diagonal() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }
};

inline BoundingBox bounding_box(std::size_t dim, std::span<const double> coords) {
  BoundingBox box{std::vector<double>(dim, INFINITY), std::vector<double>(dim, -INFINITY)};
  for (std::size_t i = 0; i < coords.size(); i += dim)
    for (std::size_t k = 0; k < dim; ++k) {
      box.lo[k] = std::min(box.lo[k], coords[i + k]);
      box.hi[k] = std::max(box.hi[k], coords[i + k]);
    }
  return box;
}

/// Lexicographically sorted permutation of the points stored row-major in
/// `coords`. Ties keep their original relative order.
inline std::vector<std::size_t> lex_order(std::size_t dim, std::span<const double> coords) {
  std::vector<std::size_t> order(coords.size() / dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(coords.subspan(a * dim, dim), coords.subspan(b * dim, dim));
  });
  return order;
}

/// Given a lexicographic order, returns indices of the points kept after
/// merging every point that lies within `tol` of an earlier kept point.
/// Exact duplicates collapse even when tol == 0.
inline std::vector<std::size_t> dedup_sorted(std::size_t dim, std::span<const double> coords,
                                             std::span<const std::size_t> order, double tol) {
  std::vector<std::size_t> kept;
  kept.reserve(order.size());
  const double tol2 = tol * tol;
  for (std::size_t idx : order) {
    const auto p = coords.subspan(idx * dim, dim);
    bool dup = false;
    if (!kept.empty()) {
      const auto last = coords.subspan(kept.back() * dim, dim);
      if (std::equal(p.begin(), p.end(), last.begin())) {
        dup = true;
      } else if (tol > 0.0) {
        // Kept points are sorted by first coordinate; only the window within
        // tol of p[0] can be close.
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
          const auto q = coords.subspan(*it * dim, dim);
          if (p[0] - q[0] > tol) break;
          if (squared_distance(p, q) <= tol2) {
            dup = true;
            break;
          }
        }
      }
    }
    if (!dup) kept.push_back(idx);
  }
  return kept;
}

/// Finite nonempty set of points in R^d, stored row-major in canonical form:
/// lexicographically sorted with near-duplicates merged.
class PointSet {
 public:
  struct CanonicalTag {};
  static constexpr CanonicalTag canonical{};

  /// Canonicalizes `coords` (row-major, `dim` columns). `dedup_tol < 0`
  /// selects the default radius kDedupRelative * bounding-box diagonal.
  PointSet(std::size_t dim, std::vector<double> coords, double dedup_tol = -1.0) : dim_(dim) {
    validate(dim, coords);
    const auto box = bounding_box(dim, coords);
    tol_ = dedup_tol >= 0.0 ? dedup_tol : kDedupRelative * box.diagonal();
    const auto order = lex_order(dim, coords);
    const auto kept = dedup_sorted(dim, coords, order, tol_);
    coords_.reserve(kept.size() * dim);
    for (std::size_t idx : kept)
      coords_.insert(coords_.end(), coords.begin() + idx * dim, coords.begin() + (idx + 1) * dim);
  }

  /// Trusts the caller that `coords` is already sorted and duplicate free.
  PointSet(CanonicalTag, std::size_t dim, std::vector<double> coords, double dedup_tol = 0.0)
      : dim_(dim), tol_(dedup_tol), coords_(std::move(coords)) {
    validate(dim_, coords_);
  }

  static PointSet from_points(const std::vector<Point>& pts) {
    if (pts.empty()) throw std::invalid_argument("PointSet must be nonempty");
    const std::size_t dim = pts.front().size();
    std::vector<double> coords;
    coords.reserve(pts.size() * dim);
    for (const auto& p : pts) {
      require_same_dim(dim, p.size());
      coords.insert(coords.end(), p.begin(), p.end());
    }
    return PointSet(dim, std::move(coords));
  }

  /// One-dimensional convenience constructor.
  static PointSet line(std::vector<double> xs) { return PointSet(1, std::move(xs)); }

  /// Uniform grid {lo + i*step} on [lo, hi] in one dimension.
  static PointSet uniform_grid_1d(double lo, double hi, double step) {
    std::vector<double> xs;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) xs.push_back(lo + static_cast<double>(i) * step);
    if (xs.back() < hi) xs.push_back(hi);
    return PointSet(1, std::move(xs));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  double dedup_tolerance() const noexcept { return tol_; }

  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> coords() const noexcept { return coords_; }

  Point point(std::size_t i) const {
    const auto p = (*this)[i];
    return Point(p.begin(), p.end());
  }

  BoundingBox bbox() const { return bounding_box(dim_, coords_); }

  bool contains(std::span<const double> p, double tol = 0.0) const {
    for (std::size_t i = 0; i < size(); ++i)
      if (squared_distance((*this)[i], p) <= tol * tol) return true;
    return false;
  }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_;
  }

 private:
  static void validate(std::size_t dim, const std::vector<double>& coords) {
    if (dim == 0) throw std::invalid_argument("PointSet dimension must be positive");
    if (coords.empty()) throw std::invalid_argument("PointSet must be nonempty");
    if (coords.size() % dim != 0)
      throw std::invalid_argument("PointSet coordinate count is not a multiple of the dimension");
    for (double v : coords)
      if (!std::isfinite(v)) throw std::invalid_argument("PointSet coordinates must be finite");
  }

  std::size_t dim_ = 0;
  double tol_ = 0.0;
  std::vector<double> coords_;
};

}  // namespace gifs
