#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/grid.hpp"
#include "gifs/ifs.hpp"
#include "gifs/ledger.hpp"
#include "gifs/linalg.hpp"
#include "gifs/metric.hpp"
#include "gifs/point_set.hpp"
#include "gifs/schedule.hpp"

namespace gifs {

/// phi(x_1, ..., x_m) = sum_i A_i x_i + c, an (a_1, ..., a_m)-contraction
/// with a_i = ||A_i||_2.
///
/// Evaluation order is fixed: start from c, add A_2 x_2, ..., A_m x_m, and
/// add A_1 x_1 last. Induced maps reuse the partial sum as their offset, so
/// phi(x, b) and psi_b(x) agree bit for bit.
class MultiAffineMap {
 public:
  MultiAffineMap(std::vector<Matrix> matrices, Point offset)
      : matrices_(std::move(matrices)), offset_(std::move(offset)) {
    if (matrices_.empty()) throw std::invalid_argument("MultiAffineMap needs at least one argument");
    const std::size_t d = offset_.size();
    if (d == 0) throw std::invalid_argument("MultiAffineMap: empty offset");
    for (double v : offset_)
      if (!std::isfinite(v)) throw std::invalid_argument("MultiAffineMap: non-finite offset");
    for (const auto& m : matrices_) {
      if (m.rows() != d || m.cols() != d)
        throw std::invalid_argument("MultiAffineMap: every matrix must be d x d");
      arg_lips_.push_back(lipschitz_upper(m));
    }
  }

  std::size_t order() const noexcept { return matrices_.size(); }
  std::size_t dim() const noexcept { return offset_.size(); }
  const std::vector<Matrix>& matrices() const noexcept { return matrices_; }
  const Point& offset() const noexcept { return offset_; }
  const std::vector<double>& arg_lips() const noexcept { return arg_lips_; }
  double lip_sum() const { return std::accumulate(arg_lips_.begin(), arg_lips_.end(), 0.0); }

  /// c + sum_{i>=2} A_i b_i for the trailing arguments b_2..b_m.
  Point partial_offset(std::span<const std::span<const double>> trailing) const {
    Point acc = offset_;
    for (std::size_t i = 1; i < matrices_.size(); ++i) accumulate_product(matrices_[i], trailing[i - 1], acc);
    return acc;
  }

  void apply(std::span<const std::span<const double>> args, std::span<double> out) const {
    const Point partial = partial_offset(args.subspan(1));
    std::copy(partial.begin(), partial.end(), out.begin());
    accumulate_product(matrices_[0], args[0], out);
  }

  Point operator()(std::span<const std::span<const double>> args) const {
    Point out(dim());
    apply(args, out);
    return out;
  }

  /// The one-argument map x -> phi(x, b_2, ..., b_m).
  AffineMap induced(std::span<const std::span<const double>> trailing) const {
    return AffineMap(matrices_[0], partial_offset(trailing), arg_lips_[0]);
  }

  BoundingBox image_box(std::span<const BoundingBox> boxes) const {
    const std::size_t d = dim();
    BoundingBox out{offset_, offset_};
    std::vector<double> radius(d, 0.0), center = offset_;
    for (std::size_t i = 0; i < matrices_.size(); ++i) {
      const auto& m = matrices_[i];
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
          const double mid = 0.5 * (boxes[i].lo[c] + boxes[i].hi[c]);
          const double rad = 0.5 * (boxes[i].hi[c] - boxes[i].lo[c]);
          center[r] += m(r, c) * mid;
          radius[r] += std::abs(m(r, c)) * rad;
        }
    }
    for (std::size_t r = 0; r < d; ++r) {
      out.lo[r] = center[r] - radius[r];
      out.hi[r] = center[r] + radius[r];
    }
    return out;
  }

 private:
  std::vector<Matrix> matrices_;
  Point offset_;
  std::vector<double> arg_lips_;
};

/// Order-m GIFS: finitely many maps (R^d)^m -> R^d with sum_i a_i < 1.
class GifsSystem {
 public:
  explicit GifsSystem(std::vector<MultiAffineMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw std::invalid_argument("GifsSystem needs at least one map");
    order_ = maps_.front().order();
    dim_ = maps_.front().dim();
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      const auto& m = maps_[j];
      if (m.order() != order_) throw std::invalid_argument("GifsSystem: maps disagree on the order");
      require_same_dim(dim_, m.dim());
      const double s = m.lip_sum();
      if (!(s < 1.0))
        throw std::invalid_argument("GifsSystem map " + std::to_string(j) +
                                    " is not contractive: sum of argument Lipschitz constants = " + std::to_string(s));
      lip_fs_ = std::max(lip_fs_, s);
    }
  }

  const std::vector<MultiAffineMap>& maps() const noexcept { return maps_; }
  std::size_t size() const noexcept { return maps_.size(); }
  std::size_t order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  double lip_fs() const noexcept { return lip_fs_; }

 private:
  std::vector<MultiAffineMap> maps_;
  std::size_t order_ = 1;
  std::size_t dim_ = 1;
  double lip_fs_ = 0.0;
};

inline constexpr std::size_t kDefaultMapBudget = 200'000;

namespace detail {

/// base^exp, saturating at size_t max.
inline std::size_t saturating_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base) return std::numeric_limits<std::size_t>::max();
    r *= base;
  }
  return r;
}

inline std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

/// Calls f(spans) for every tuple in sets[0] x ... x sets[k-1], last index
/// fastest. An empty list of sets yields one empty tuple.
template <class F>
void for_each_tuple(std::span<const PointSet* const> sets, F&& f) {
  const std::size_t k = sets.size();
  std::vector<std::size_t> idx(k, 0);
  std::vector<std::span<const double>> tuple(k);
  for (std::size_t i = 0; i < k; ++i) tuple[i] = (*sets[i])[0];
  while (true) {
    f(std::span<const std::span<const double>>(tuple));
    std::size_t pos = k;
    while (pos-- > 0) {
      if (++idx[pos] < sets[pos]->size()) {
        tuple[pos] = (*sets[pos])[idx[pos]];
        break;
      }
      idx[pos] = 0;
      tuple[pos] = (*sets[pos])[0];
    }
    if (pos == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace detail

/// F_S(A_1, ..., A_m) = union_j phi_j(A_1 x ... x A_m), snapped at delta
/// (delta == 0 keeps exact images). Throws BudgetExceeded when the raw
/// image count n * prod |A_i| exceeds point_budget.
inline PointSet gifs_operator(const GifsSystem& s, std::span<const PointSet* const> args, double delta,
                              std::size_t point_budget = kDefaultPointBudget) {
  if (args.size() != s.order()) throw std::invalid_argument("gifs_operator: expected one set per argument");
  for (const auto* a : args) require_same_dim(s.dim(), a->dim());
  if (delta < 0.0) throw std::invalid_argument("gifs_operator: delta must be nonnegative");
  std::size_t raw = s.size();
  for (const auto* a : args) raw = detail::saturating_mul(raw, a->size());
  if (raw > point_budget) throw BudgetExceeded("GIFS image count", raw, point_budget);

  const std::size_t d = s.dim();
  const auto trailing = args.subspan(1);
  const PointSet& first = *args[0];

  auto emit_all = [&](auto&& sink) {
    std::vector<double> image(d);
    for (const auto& phi : s.maps()) {
      detail::for_each_tuple(trailing, [&](std::span<const std::span<const double>> b) {
        const Point partial = phi.partial_offset(b);
        for (std::size_t i = 0; i < first.size(); ++i) {
          std::copy(partial.begin(), partial.end(), image.begin());
          accumulate_product(phi.matrices()[0], first[i], image);
          sink(image);
        }
      });
    }
  };

  if (delta > 0.0) {
    std::vector<BoundingBox> boxes;
    for (const auto* a : args) boxes.push_back(a->bbox());
    BoundingBox box = s.maps().front().image_box(boxes);
    for (std::size_t j = 1; j < s.size(); ++j) merge_box(box, s.maps()[j].image_box(boxes));
    CellSet cells(d, delta, padded(box));
    emit_all([&](std::span<const double> p) { cells.insert(p); });
    return PointSet(PointSet::canonical, d, cells.centers());
  }
  std::vector<double> coords;
  coords.reserve(raw * d);
  emit_all([&](std::span<const double> p) { coords.insert(coords.end(), p.begin(), p.end()); });
  return PointSet(d, std::move(coords));
}

/// Simplified operator F_S(A, ..., A).
inline PointSet gifs_step(const GifsSystem& s, const PointSet& a, double delta,
                          std::size_t point_budget = kDefaultPointBudget) {
  const std::vector<const PointSet*> args(s.order(), &a);
  return gifs_operator(s, args, delta, point_budget);
}

/// The m-term recursion A_{k+m} = F_S(A_k, ..., A_{k+m-1}); returns the
/// last of `steps` new terms.
inline PointSet classical_gifs_iterate(const GifsSystem& s, const std::vector<PointSet>& seeds, std::size_t steps,
                                       double delta, std::size_t point_budget = kDefaultPointBudget) {
  if (seeds.size() != s.order()) throw std::invalid_argument("classical_gifs_iterate: need one seed per argument");
  if (steps == 0) throw std::invalid_argument("classical_gifs_iterate: steps must be positive");
  for (const auto& a : seeds) require_same_dim(s.dim(), a.dim());
  std::deque<PointSet> window(seeds.begin(), seeds.end());
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<const PointSet*> args;
    for (const auto& a : window) args.push_back(&a);
    PointSet next = gifs_operator(s, args, delta, point_budget);
    window.pop_front();
    window.push_back(std::move(next));
  }
  return window.back();
}

/// Certified distance from any finite C to the GIFS attractor:
/// h(C, A_S) <= h(C, F(C)) / (1 - Lip(F)), with F(C) snapped at delta and
/// the snapping error added back.
inline double a_posteriori_bound(const GifsSystem& s, const PointSet& c, double delta,
                                 std::size_t point_budget = kDefaultPointBudget) {
  const PointSet image = gifs_step(s, c, delta, point_budget);
  const double slack = delta > 0.0 ? grid_snap_error(delta, s.dim()) : image.dedup_tolerance();
  return (hausdorff(c, image) + slack) / (1.0 - s.lip_fs());
}

/// Finite IFS {x -> phi_j(x, b) : b in B^{m-1}, j = 1..n}, j outermost.
inline FiniteIfs induce_ifs(const GifsSystem& s, const PointSet& b, std::size_t map_budget = kDefaultMapBudget) {
  require_same_dim(s.dim(), b.dim());
  const std::size_t count = detail::saturating_mul(s.size(), detail::saturating_pow(b.size(), s.order() - 1));
  if (count > map_budget) throw BudgetExceeded("induced map count", count, map_budget);
  std::vector<AffineMap> maps;
  maps.reserve(count);
  const std::vector<const PointSet*> trailing(s.order() - 1, &b);
  for (const auto& phi : s.maps())
    detail::for_each_tuple(trailing, [&](std::span<const std::span<const double>> tuple) {
      maps.push_back(phi.induced(tuple));
    });
  return FiniteIfs(std::move(maps));
}

struct LipschitzData {
  std::vector<std::vector<double>> per_map;  // (a_1, ..., a_m) for each map
  double lip_fs = 0.0;                       // max_j sum_i a_i
  double alpha_ev_bound = 0.0;               // bound on Lip(ev_S)
};

inline LipschitzData lipschitz_data(const GifsSystem& s) {
  LipschitzData out;
  for (const auto& phi : s.maps()) out.per_map.push_back(phi.arg_lips());
  out.lip_fs = s.lip_fs();
  out.alpha_ev_bound = s.lip_fs();
  return out;
}

/// ev_S(B): attractor of the system induced by B, certified within sigma.
inline AttractorResult evaluation_map(const GifsSystem& s, const PointSet& b, double sigma,
                                      std::size_t map_budget = kDefaultMapBudget,
                                      const AttractorOptions& inner = {}) {
  if (!(sigma > 0.0)) throw std::invalid_argument("evaluation_map: sigma must be positive");
  const FiniteIfs ifs = induce_ifs(s, b, map_budget);
  return attractor(ifs, sigma, inner);
}

struct ApproximationOptions {
  std::size_t map_budget = kDefaultMapBudget;
  AttractorOptions inner;
  /// Stop early once the certified bound is at most this (0 disables).
  double stop_below = 0.0;
  /// Factor applied to beta when the induced map count exceeds the budget.
  double beta_growth = 1.5;
};

struct ApproximationResult {
  PointSet set;
  OstrowskiLedger ledger;
  std::vector<std::size_t> subset_sizes;  // |B_{k-1}^beta|
  std::vector<std::size_t> map_counts;
  std::vector<std::size_t> set_sizes;     // |B_k|
  bool budget_exceeded = false;
  std::string note;
};

/// Outer loop: subsample B_{k-1} to beta_k density, induce a finite IFS,
/// solve its attractor to sigma_k and record eps_k = alpha*beta_k + sigma_k
/// with alpha = lip_fs. d01 = h(B_0, B_1) + eps_1 bounds h(B_0, ev_S(B_0)).
inline ApproximationResult approximate_attractor(const GifsSystem& s, const PointSet& b0, const Schedules& sched,
                                                 std::size_t steps, const ApproximationOptions& opts = {}) {
  require_same_dim(s.dim(), b0.dim());
  if (steps == 0) throw std::invalid_argument("approximate_attractor: K must be positive");
  const double alpha = s.lip_fs();
  ApproximationResult out{b0, OstrowskiLedger(alpha, 0.0), {}, {}, {}, false, {}};

  for (std::size_t k = 1; k <= steps; ++k) {
    double beta = sched.beta(k);
    const double sigma = sched.sigma(k);
    std::string note;
    try {
      PointSet subset = beta_dense_subset(out.set, beta);
      if (s.order() > 1) {
        while (detail::saturating_mul(s.size(), detail::saturating_pow(subset.size(), s.order() - 1)) >
               opts.map_budget) {
          beta *= opts.beta_growth;
          subset = beta_dense_subset(out.set, beta);
          note = "beta raised to " + std::to_string(beta) + " for the map budget";
        }
      }
      const FiniteIfs ifs = induce_ifs(s, subset, opts.map_budget);
      AttractorResult inner = attractor(ifs, sigma, opts.inner);
      if (inner.report.budget_exceeded) {
        out.budget_exceeded = true;
        out.note = "inner solve at step " + std::to_string(k) + ": " + inner.report.note;
        break;
      }
      double sigma_used = sigma;
      if (!inner.report.converged) {
        sigma_used = inner.report.bound();
        note += (note.empty() ? "" : "; ") + std::string("inner bound ") + std::to_string(sigma_used) +
                " exceeds sigma";
      }
      const double eps = alpha * beta + sigma_used;
      out.subset_sizes.push_back(subset.size());
      out.map_counts.push_back(ifs.size());
      out.set_sizes.push_back(inner.set.size());
      out.ledger.push(eps, beta, sigma, note);
      if (k == 1) out.ledger.set_d01(hausdorff(b0, inner.set) + eps);
      out.set = std::move(inner.set);
    } catch (const BudgetExceeded& e) {
      out.budget_exceeded = true;
      out.note = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
    if (opts.stop_below > 0.0 && out.ledger.final_bound() <= opts.stop_below) break;
  }
  return out;
}

}  // namespace gifs
