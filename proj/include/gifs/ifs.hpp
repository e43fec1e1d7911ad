#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/grid.hpp"
#include "gifs/ledger.hpp"
#include "gifs/linalg.hpp"
#include "gifs/metric.hpp"
#include "gifs/point_set.hpp"

namespace gifs {

/// x -> matrix * x + offset, with its Lipschitz constant cached.
class AffineMap {
 public:
  AffineMap(Matrix matrix, Point offset) : matrix_(std::move(matrix)), offset_(std::move(offset)) {
    check_shape();
    lip_ = lipschitz_upper(matrix_);
  }

  /// For callers that already know the operator norm of `matrix`.
  AffineMap(Matrix matrix, Point offset, double lip)
      : matrix_(std::move(matrix)), offset_(std::move(offset)), lip_(lip) {
    check_shape();
  }

  std::size_t dim() const noexcept { return offset_.size(); }
  const Matrix& matrix() const noexcept { return matrix_; }
  const Point& offset() const noexcept { return offset_; }
  double lip() const noexcept { return lip_; }

  void apply(std::span<const double> x, std::span<double> out) const {
    std::copy(offset_.begin(), offset_.end(), out.begin());
    accumulate_product(matrix_, x, out);
  }

  Point operator()(std::span<const double> x) const {
    Point out(dim());
    apply(x, out);
    return out;
  }

  /// Unique fixed point (I - M)^{-1} t; requires lip < 1.
  Point fixed_point() const {
    Matrix a = Matrix::identity(dim());
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) a(r, c) -= matrix_(r, c);
    return solve_linear(std::move(a), offset_);
  }

  /// Enclosure of the image of `box` (center/radius interval arithmetic).
  BoundingBox image_box(const BoundingBox& box) const {
    const std::size_t d = dim();
    std::vector<double> c(d), r(d);
    for (std::size_t k = 0; k < d; ++k) {
      c[k] = 0.5 * (box.lo[k] + box.hi[k]);
      r[k] = 0.5 * (box.hi[k] - box.lo[k]);
    }
    BoundingBox out{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t i = 0; i < d; ++i) {
      double center = offset_[i], radius = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        center += matrix_(i, k) * c[k];
        radius += std::abs(matrix_(i, k)) * r[k];
      }
      out.lo[i] = center - radius;
      out.hi[i] = center + radius;
    }
    return out;
  }

 private:
  void check_shape() const {
    if (!matrix_.square() || matrix_.rows() != offset_.size() || offset_.empty())
      throw std::invalid_argument("AffineMap: matrix must be d x d with a length-d offset");
    for (double v : offset_)
      if (!std::isfinite(v)) throw std::invalid_argument("AffineMap: non-finite offset");
    if (!matrix_.all_finite()) throw std::invalid_argument("AffineMap: non-finite matrix entry");
  }

  Matrix matrix_;
  Point offset_;
  double lip_ = 0.0;
};

inline void merge_box(BoundingBox& into, const BoundingBox& other) {
  for (std::size_t k = 0; k < into.lo.size(); ++k) {
    into.lo[k] = std::min(into.lo[k], other.lo[k]);
    into.hi[k] = std::max(into.hi[k], other.hi[k]);
  }
}

/// Finite contractive IFS on R^d.
class FiniteIfs {
 public:
  explicit FiniteIfs(std::vector<AffineMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw std::invalid_argument("FiniteIfs needs at least one map");
    dim_ = maps_.front().dim();
    for (const auto& m : maps_) {
      require_same_dim(dim_, m.dim());
      alpha_ = std::max(alpha_, m.lip());
    }
    if (!(alpha_ < 1.0))
      throw std::invalid_argument("FiniteIfs is not contractive: max Lipschitz constant " + std::to_string(alpha_));
  }

  const std::vector<AffineMap>& maps() const noexcept { return maps_; }
  std::size_t size() const noexcept { return maps_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double alpha() const noexcept { return alpha_; }

  BoundingBox image_box(const BoundingBox& box) const {
    BoundingBox out = maps_.front().image_box(box);
    for (std::size_t i = 1; i < maps_.size(); ++i) merge_box(out, maps_[i].image_box(box));
    return out;
  }

 private:
  std::vector<AffineMap> maps_;
  std::size_t dim_ = 0;
  double alpha_ = 0.0;
};

inline constexpr std::size_t kDefaultPointBudget = 10'000'000;
inline constexpr std::size_t kDefaultIterationCap = 10'000;

/// Union of the images of A under every map, then snapped to a lattice of
/// spacing delta (delta == 0 keeps the exact images, merged at the default
/// dedup radius).
inline PointSet fractal_step(const FiniteIfs& ifs, const PointSet& a, double delta,
                             std::size_t point_budget = std::numeric_limits<std::size_t>::max()) {
  require_same_dim(ifs.dim(), a.dim());
  if (delta < 0.0) throw std::invalid_argument("fractal_step: delta must be nonnegative");
  const std::size_t raw = ifs.size() * a.size();
  if (raw / ifs.size() != a.size() || raw > point_budget)
    throw BudgetExceeded("fractal_step image count", raw, point_budget);

  const std::size_t d = a.dim();
  std::vector<double> image(d);
  if (delta > 0.0) {
    CellSet cells(d, delta, padded(ifs.image_box(a.bbox())));
    for (const auto& map : ifs.maps())
      for (std::size_t i = 0; i < a.size(); ++i) {
        map.apply(a[i], image);
        cells.insert(image);
      }
    return PointSet(PointSet::canonical, d, cells.centers());
  }
  std::vector<double> coords(raw * d);
  std::size_t at = 0;
  for (const auto& map : ifs.maps())
    for (std::size_t i = 0; i < a.size(); ++i, at += d)
      map.apply(a[i], std::span<double>(coords).subspan(at, d));
  return PointSet(d, std::move(coords));
}

/// Lattice spacing whose accumulated snapping error stays below tol/2 for a
/// contraction factor alpha: sum_k alpha^k * delta*sqrt(d)/2 <= tol/2.
inline double default_prune_delta(double tol, double alpha, std::size_t dim) {
  return tol * (1.0 - alpha) / std::sqrt(static_cast<double>(dim));
}

struct AttractorOptions {
  /// Per-step lattice spacings; the last entry repeats. Empty selects
  /// default_prune_delta for the requested tolerance.
  std::vector<double> delta_schedule;
  std::size_t iteration_cap = kDefaultIterationCap;
  std::size_t point_budget = kDefaultPointBudget;
};

struct AttractorResult {
  PointSet set;
  ConvergenceReport report;
};

namespace detail {

/// Inexactness introduced by one snapped (or merely deduplicated) step.
inline double step_inexactness(double delta, std::size_t dim, const PointSet& produced) {
  return delta > 0.0 ? grid_snap_error(delta, dim) : produced.dedup_tolerance();
}

}  // namespace detail

/// Picard iteration A_{k+1} = snap(F(A_k)) certified by the inexact
/// fixed-point estimate; stops as soon as the certified distance to the
/// exact attractor is at most tol.
inline AttractorResult attractor(const FiniteIfs& ifs, const PointSet& seed, double tol,
                                 const AttractorOptions& opts = {}) {
  require_same_dim(ifs.dim(), seed.dim());
  if (!(tol > 0.0)) throw std::invalid_argument("attractor: tol must be positive");
  const double alpha = ifs.alpha();
  const std::size_t d = ifs.dim();
  auto delta_at = [&](std::size_t k) {
    if (opts.delta_schedule.empty()) return default_prune_delta(tol, alpha, d);
    return opts.delta_schedule[std::min(k, opts.delta_schedule.size()) - 1];
  };

  ConvergenceReport report;
  // d(A_0, F(A_0)) needs the exact first image.
  const PointSet exact_first = fractal_step(ifs, seed, 0.0, opts.point_budget);
  const double d01 = hausdorff(seed, exact_first) + exact_first.dedup_tolerance();
  report.ledger = OstrowskiLedger(alpha, d01);

  PointSet current = seed;
  for (std::size_t k = 1; k <= opts.iteration_cap; ++k) {
    const double delta = delta_at(k);
    std::optional<PointSet> next;
    try {
      if (k == 1)
        next = delta > 0.0 ? prune_to_grid(exact_first, delta) : exact_first;
      else
        next = fractal_step(ifs, current, delta, opts.point_budget);
    } catch (const BudgetExceeded& e) {
      report.budget_exceeded = true;
      report.note = e.what();
      break;
    }
    const double eps = k == 1 && delta == 0.0 ? exact_first.dedup_tolerance()
                                              : detail::step_inexactness(delta, d, *next);
    report.ledger.push(eps);
    report.step_distance.push_back(hausdorff(current, *next));
    report.sizes.push_back(next->size());
    report.iterations = k;
    current = std::move(*next);
    const double b = report.ledger.final_bound();
    if (b <= tol) {
      report.converged = true;
      break;
    }
    // Once the contraction term is negligible the bound sits on the
    // snapping floor; further steps cannot reach tol.
    const double picard = std::pow(alpha, static_cast<double>(k)) / (1.0 - alpha) * d01;
    if (picard < 1e-6 * tol && b > tol) {
      report.note = "snapping floor above tolerance";
      break;
    }
  }
  if (!report.converged && report.note.empty()) report.note = "iteration cap reached";
  return {std::move(current), std::move(report)};
}

/// Singleton seed at the fixed point of the first map.
inline PointSet default_seed(const FiniteIfs& ifs) {
  return PointSet(ifs.dim(), ifs.maps().front().fixed_point());
}

inline AttractorResult attractor(const FiniteIfs& ifs, double tol, const AttractorOptions& opts = {}) {
  return attractor(ifs, default_seed(ifs), tol, opts);
}

}  // namespace gifs
