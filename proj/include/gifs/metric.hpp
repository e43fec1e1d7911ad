#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/grid.hpp"
#include "gifs/nearest.hpp"
#include "gifs/point_set.hpp"

namespace gifs {

/// sup_{a in A} inf_{b in B} |a - b|. Exact; each nearest query may stop
/// early once it cannot raise the running maximum.
inline double directed_distance(const PointSet& a, const PointSet& b) {
  require_same_dim(a.dim(), b.dim());
  const NearestIndex index(b);
  double best2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto hit = index.nearest(a[i], best2);
    if (hit.dist2 > best2) best2 = hit.dist2;
  }
  return std::sqrt(best2);
}

/// Hausdorff-Pompeiu distance max(d(A,B), d(B,A)).
inline double hausdorff(const PointSet& a, const PointSet& b) {
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

/// Greedy farthest-point subset S of A with hausdorff(A, S) < beta, seeded at
/// the lexicographically smallest point. Ties pick the smallest index.
inline PointSet beta_dense_subset(const PointSet& a, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta_dense_subset: beta must be positive");
  const std::size_t n = a.size();
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chosen;
  std::size_t next = 0;
  const double beta2 = beta * beta;
  while (true) {
    chosen.push_back(next);
    const auto c = a[next];
    double far2 = -1.0;
    std::size_t far = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = std::min(dist2[i], squared_distance(a[i], c));
      dist2[i] = d2;
      if (d2 > far2) {
        far2 = d2;
        far = i;
      }
    }
    if (far2 < beta2) break;
    next = far;
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<double> coords;
  coords.reserve(chosen.size() * a.dim());
  for (std::size_t i : chosen) {
    const auto p = a[i];
    coords.insert(coords.end(), p.begin(), p.end());
  }
  // Indices of a canonical set are already in lexicographic order.
  return PointSet(PointSet::canonical, a.dim(), std::move(coords), a.dedup_tolerance());
}

/// Worst-case displacement of snapping to a lattice of spacing delta.
inline double grid_snap_error(double delta, std::size_t dim) {
  return delta * std::sqrt(static_cast<double>(dim)) / 2.0;
}

/// Snaps every point to the center of its lattice cell and merges; the
/// result is within grid_snap_error(delta, dim) of A in Hausdorff distance.
inline PointSet prune_to_grid(const PointSet& a, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("prune_to_grid: delta must be positive");
  CellSet cells(a.dim(), delta, a.bbox());
  for (std::size_t i = 0; i < a.size(); ++i) cells.insert(a[i]);
  return PointSet(PointSet::canonical, a.dim(), cells.centers());
}

}  // namespace gifs
