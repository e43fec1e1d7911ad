#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/grid.hpp"
#include "gifs/metric.hpp"
#include "gifs/nearest.hpp"
#include "gifs/point_set.hpp"

namespace gifs {

inline constexpr double kWeightSumTolerance = 1e-12;
/// Beyond this the weights are rejected rather than rescaled.
inline constexpr double kWeightSumHardLimit = 1e-9;
inline constexpr double kDefaultWeightFloor = 1e-10;

/// Neumaier-compensated sum, insensitive to the order of a few large terms.
inline double compensated_sum(std::span<const double> v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

/// Finitely supported probability measure on R^d. Atoms are kept in
/// canonical PointSet order with weights aligned to them.
class DiscreteMeasure {
 public:
  /// Sorts the atoms, merges atoms closer than the dedup radius (adding
  /// their weights in input order) and checks normalization. Sums off by
  /// more than kWeightSumTolerance but less than kWeightSumHardLimit are
  /// rescaled; anything larger is an error.
  DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights, double dedup_tol = -1.0)
      : DiscreteMeasure(canonicalize(dim, coords, weights, dedup_tol)) {}

  /// Trusts that `atoms` is canonical and `weights` aligned and positive.
  DiscreteMeasure(PointSet atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (weights_.size() != atoms_.size()) throw std::invalid_argument("DiscreteMeasure: one weight per atom required");
    check_weights(weights_);
    normalize();
  }

  static DiscreteMeasure dirac(Point x) {
    const std::size_t d = x.size();
    return DiscreteMeasure(d, std::move(x), {1.0});
  }

  /// Equal weights on the points of `s`.
  static DiscreteMeasure uniform(const PointSet& s) {
    return DiscreteMeasure(s, std::vector<double>(s.size(), 1.0 / static_cast<double>(s.size())));
  }

  std::size_t dim() const noexcept { return atoms_.dim(); }
  std::size_t size() const noexcept { return weights_.size(); }
  const PointSet& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::span<const double> atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double total_mass() const { return compensated_sum(weights_); }

  /// Integral of f against the measure.
  template <class F>
  double integrate(F&& f) const {
    std::vector<double> terms(size());
    for (std::size_t i = 0; i < size(); ++i) terms[i] = weights_[i] * f(atoms_[i]);
    return compensated_sum(terms);
  }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
  }

 private:
  static std::pair<PointSet, std::vector<double>> canonicalize(std::size_t dim, const std::vector<double>& coords,
                                                               const std::vector<double>& weights, double dedup_tol) {
    if (dim == 0 || coords.size() != weights.size() * dim)
      throw std::invalid_argument("DiscreteMeasure: one weight per atom required");
    check_weights(weights);
    const PointSet probe(PointSet::canonical, dim, coords);  // validates coordinates
    const double tol = dedup_tol >= 0.0 ? dedup_tol : kDedupRelative * probe.bbox().diagonal();
    const auto order = lex_order(dim, coords);

    std::vector<double> kept_coords;
    std::vector<double> kept_weights;
    const double tol2 = tol * tol;
    for (std::size_t idx : order) {
      const std::span<const double> p(coords.data() + idx * dim, dim);
      std::size_t target = kept_weights.size();
      if (!kept_weights.empty()) {
        const std::size_t last = kept_weights.size() - 1;
        const std::span<const double> q(kept_coords.data() + last * dim, dim);
        if (std::equal(p.begin(), p.end(), q.begin())) {
          target = last;
        } else if (tol > 0.0) {
          for (std::size_t k = kept_weights.size(); k-- > 0;) {
            const std::span<const double> r(kept_coords.data() + k * dim, dim);
            if (p[0] - r[0] > tol) break;
            if (squared_distance(p, r) <= tol2) {
              target = k;
              break;
            }
          }
        }
      }
      if (target == kept_weights.size()) {
        kept_coords.insert(kept_coords.end(), p.begin(), p.end());
        kept_weights.push_back(weights[idx]);
      } else {
        kept_weights[target] += weights[idx];
      }
    }
    return {PointSet(PointSet::canonical, dim, std::move(kept_coords), tol), std::move(kept_weights)};
  }

  explicit DiscreteMeasure(std::pair<PointSet, std::vector<double>> parts)
      : DiscreteMeasure(std::move(parts.first), std::move(parts.second)) {}

  static void check_weights(const std::vector<double>& w) {
    if (w.empty()) throw std::invalid_argument("DiscreteMeasure must have at least one atom");
    for (double v : w)
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("DiscreteMeasure weights must be positive");
  }

  void normalize() {
    const double s = compensated_sum(weights_);
    if (std::abs(s - 1.0) > kWeightSumHardLimit)
      throw std::invalid_argument("DiscreteMeasure weights sum to " + std::to_string(s) + ", not 1");
    if (std::abs(s - 1.0) > kWeightSumTolerance)
      for (double& w : weights_) w /= s;
  }

  PointSet atoms_;
  std::vector<double> weights_;
};

/// Bookkeeping for atoms folded away below the weight floor.
struct MergeStats {
  std::size_t merged_atoms = 0;
  double merged_mass = 0.0;
  /// sum of (moved mass * distance moved): an upper bound on the MK
  /// distance between the measures before and after merging.
  double transport_bound = 0.0;
};

/// Moves every atom lighter than w_min onto the nearest surviving atom.
/// Total mass is unchanged. If every atom is below the floor the heaviest
/// one survives.
inline DiscreteMeasure merge_light_atoms(const DiscreteMeasure& mu, double w_min, MergeStats* stats = nullptr) {
  if (w_min <= 0.0) return mu;
  const std::size_t n = mu.size();
  std::vector<char> keep(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i)
    if (mu.weight(i) >= w_min) keep[i] = 1, any = true;
  if (!any) keep[static_cast<std::size_t>(std::max_element(mu.weights().begin(), mu.weights().end()) -
                                          mu.weights().begin())] = 1;
  if (std::all_of(keep.begin(), keep.end(), [](char k) { return k != 0; })) return mu;

  std::vector<double> coords;
  std::vector<double> weights;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) {
      const auto p = mu.atom(i);
      coords.insert(coords.end(), p.begin(), p.end());
      weights.push_back(mu.weight(i));
    }
  const PointSet survivors(PointSet::canonical, mu.dim(), std::move(coords), mu.atoms().dedup_tolerance());
  const NearestIndex index(survivors);
  MergeStats local;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) continue;
    const auto hit = index.nearest(mu.atom(i));
    weights[hit.index] += mu.weight(i);
    local.merged_atoms += 1;
    local.merged_mass += mu.weight(i);
    local.transport_bound += mu.weight(i) * std::sqrt(hit.dist2);
  }
  if (stats) {
    stats->merged_atoms += local.merged_atoms;
    stats->merged_mass += local.merged_mass;
    stats->transport_bound += local.transport_bound;
  }
  return DiscreteMeasure(survivors, std::move(weights));
}

/// Pushes the mass of every atom to the center of its lattice cell. The MK
/// distance to the input is at most grid_snap_error(delta, dim).
inline DiscreteMeasure bin_to_grid(const DiscreteMeasure& mu, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("bin_to_grid: delta must be positive");
  CellMass cells(mu.dim(), delta, mu.atoms().bbox());
  for (std::size_t i = 0; i < mu.size(); ++i) cells.add(mu.atom(i), mu.weight(i));
  auto [centers, weights] = cells.collect();
  return DiscreteMeasure(PointSet(PointSet::canonical, mu.dim(), std::move(centers)), std::move(weights));
}

/// Moves the mass of every atom to its nearest point of `target`; the MK
/// displacement is at most directed_distance(supp mu, target).
inline DiscreteMeasure project_onto(const DiscreteMeasure& mu, const PointSet& target) {
  require_same_dim(mu.dim(), target.dim());
  const NearestIndex index(target);
  std::vector<double> mass(target.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) mass[index.nearest(mu.atom(i)).index] += mu.weight(i);
  std::vector<double> coords;
  std::vector<double> weights;
  for (std::size_t k = 0; k < target.size(); ++k)
    if (mass[k] > 0.0) {
      const auto p = target[k];
      coords.insert(coords.end(), p.begin(), p.end());
      weights.push_back(mass[k]);
    }
  return DiscreteMeasure(PointSet(PointSet::canonical, target.dim(), std::move(coords), target.dedup_tolerance()),
                         std::move(weights));
}

}  // namespace gifs
