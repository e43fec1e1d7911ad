#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/gifs_system.hpp"
#include "gifs/grid.hpp"
#include "gifs/ifs.hpp"
#include "gifs/ledger.hpp"
#include "gifs/measure.hpp"
#include "gifs/metric.hpp"
#include "gifs/schedule.hpp"
#include "gifs/transport.hpp"

namespace gifs {

inline constexpr std::size_t kDefaultAtomBudget = 500'000;

/// GIFS with selection probabilities q_j > 0, sum q_j = 1.
class GifsP {
 public:
  GifsP(GifsSystem system, std::vector<double> probs) : system_(std::move(system)), probs_(std::move(probs)) {
    if (probs_.size() != system_.size())
      throw std::invalid_argument("GifsP: expected " + std::to_string(system_.size()) + " probabilities, got " +
                                  std::to_string(probs_.size()));
    for (double q : probs_)
      if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("GifsP: probabilities must be positive");
    const double s = compensated_sum(probs_);
    if (std::abs(s - 1.0) > kWeightSumTolerance)
      throw std::invalid_argument("GifsP: probabilities sum to " + std::to_string(s) + ", not 1");
  }

  /// Equal probabilities 1/n.
  static GifsP uniform(GifsSystem system) {
    const std::size_t n = system.size();
    return GifsP(std::move(system), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  const GifsSystem& system() const noexcept { return system_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  /// sum_j q_j a_1^(j): the average contraction of the first argument,
  /// which bounds the MK Lipschitz constant of the induced Markov operator.
  double average_first_lip() const {
    double s = 0.0;
    for (std::size_t j = 0; j < probs_.size(); ++j) s += probs_[j] * system_.maps()[j].arg_lips()[0];
    return s;
  }

  /// max(lip_fs, sum_{i>=2} max_j a_i / (1 - max_j a_1)).
  double joint_contraction() const {
    const std::size_t m = system_.order();
    std::vector<double> amax(m, 0.0);
    for (const auto& phi : system_.maps())
      for (std::size_t i = 0; i < m; ++i) amax[i] = std::max(amax[i], phi.arg_lips()[i]);
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += amax[i];
    return std::max(system_.lip_fs(), tail / (1.0 - amax[0]));
  }

 private:
  GifsSystem system_;
  std::vector<double> probs_;
};

struct MarkovOptions {
  /// Atoms lighter than this are folded into their nearest neighbor.
  double w_min = kDefaultWeightFloor;
  /// Lattice for binning the pushforward (0 keeps exact atoms).
  double delta = 0.0;
  std::size_t atom_budget = kDefaultAtomBudget;
};

namespace detail {

/// Calls f(tuple_of_atom_spans, product_weight) over the trailing measures,
/// last index fastest.
template <class F>
void for_each_weighted_tuple(std::span<const DiscreteMeasure* const> mus, F&& f) {
  const std::size_t k = mus.size();
  std::vector<std::size_t> idx(k, 0);
  std::vector<std::span<const double>> tuple(k);
  for (std::size_t i = 0; i < k; ++i) tuple[i] = mus[i]->atom(0);
  while (true) {
    f(std::span<const std::span<const double>>(tuple), idx);
    std::size_t pos = k;
    while (pos-- > 0) {
      if (++idx[pos] < mus[pos]->size()) {
        tuple[pos] = mus[pos]->atom(idx[pos]);
        break;
      }
      idx[pos] = 0;
      tuple[pos] = mus[pos]->atom(0);
    }
    if (pos == static_cast<std::size_t>(-1)) return;
  }
}

/// Runs emit_all(sink) and gathers the weighted images into a measure,
/// binned when opts.delta > 0, then folds light atoms away.
template <class Emit>
DiscreteMeasure collect_images(std::size_t d, std::size_t raw, const BoundingBox& box, const MarkovOptions& opts,
                               MergeStats* stats, Emit&& emit_all) {
  std::optional<DiscreteMeasure> out;
  if (opts.delta > 0.0) {
    CellMass cells(d, opts.delta, padded(box));
    emit_all([&](std::span<const double> x, double w) { cells.add(x, w); });
    auto [centers, weights] = cells.collect();
    out.emplace(PointSet(PointSet::canonical, d, std::move(centers)), std::move(weights));
  } else {
    std::vector<double> coords, weights;
    coords.reserve(raw * d);
    weights.reserve(raw);
    emit_all([&](std::span<const double> x, double w) {
      coords.insert(coords.end(), x.begin(), x.end());
      weights.push_back(w);
    });
    out.emplace(d, std::move(coords), std::move(weights));
  }
  return merge_light_atoms(*out, opts.w_min, stats);
}

/// Pushforward of q x mu_0 x ... x mu_{m-1}. The enumeration order is
/// j, then the trailing tuple, then the atoms of mu_0, and each weight is
/// (q_j * prod_{i>=1} w_i) * w_0, so the same inputs always produce the same
/// bits regardless of which public entry point built them.
inline DiscreteMeasure pushforward(const GifsP& p, std::span<const DiscreteMeasure* const> mus,
                                   const MarkovOptions& opts, MergeStats* stats) {
  const GifsSystem& s = p.system();
  if (mus.size() != s.order()) throw std::invalid_argument("Markov step: expected one measure per argument");
  for (const auto* mu : mus) require_same_dim(s.dim(), mu->dim());
  std::size_t raw = s.size();
  for (const auto* mu : mus) raw = saturating_mul(raw, mu->size());
  if (raw > opts.atom_budget) throw BudgetExceeded("product support size", raw, opts.atom_budget);

  const std::size_t d = s.dim();
  const DiscreteMeasure& first = *mus[0];
  const auto trailing = mus.subspan(1);

  auto emit_all = [&](auto&& sink) {
    std::vector<double> image(d);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto& phi = s.maps()[j];
      const double qj = p.probs()[j];
      for_each_weighted_tuple(trailing, [&](std::span<const std::span<const double>> b,
                                            const std::vector<std::size_t>& idx) {
        double w = qj;
        for (std::size_t i = 0; i < idx.size(); ++i) w *= trailing[i]->weight(idx[i]);
        const Point partial = phi.partial_offset(b);
        for (std::size_t a = 0; a < first.size(); ++a) {
          std::copy(partial.begin(), partial.end(), image.begin());
          accumulate_product(phi.matrices()[0], first.atom(a), image);
          sink(image, w * first.weight(a));
        }
      });
    }
  };

  std::vector<BoundingBox> boxes;
  for (const auto* mu : mus) boxes.push_back(mu->atoms().bbox());
  BoundingBox box = s.maps().front().image_box(boxes);
  for (std::size_t j = 1; j < s.size(); ++j) merge_box(box, s.maps()[j].image_box(boxes));
  return collect_images(d, raw, box, opts, stats, emit_all);
}

}  // namespace detail

/// Generalized Markov operator M_S(mu_0, ..., mu_{m-1}): pushforward of
/// the product measure under the maps, weighted by q.
inline DiscreteMeasure markov_step_gifsp(const GifsP& p, std::span<const DiscreteMeasure* const> mus,
                                         const MarkovOptions& opts = {}, MergeStats* stats = nullptr) {
  return detail::pushforward(p, mus, opts, stats);
}

inline DiscreteMeasure markov_step_gifsp(const GifsP& p, const std::vector<DiscreteMeasure>& mus,
                                         const MarkovOptions& opts = {}, MergeStats* stats = nullptr) {
  std::vector<const DiscreteMeasure*> ptrs;
  for (const auto& mu : mus) ptrs.push_back(&mu);
  return detail::pushforward(p, ptrs, opts, stats);
}

/// Finite IFS with probabilities: the system induced by (B, nu), where map
/// x -> phi_j(x, b_2, ..., b_m) is chosen with probability
/// q_j * prod nu(b_i). Maps are ordered j first, then the b tuple.
struct InducedIfsP {
  FiniteIfs ifs;
  std::vector<double> probs;
};

inline InducedIfsP induce_ifsp(const GifsP& p, const DiscreteMeasure& nu, std::size_t map_budget = kDefaultMapBudget) {
  const GifsSystem& s = p.system();
  require_same_dim(s.dim(), nu.dim());
  const std::size_t count = detail::saturating_mul(s.size(), detail::saturating_pow(nu.size(), s.order() - 1));
  if (count > map_budget) throw BudgetExceeded("induced map count", count, map_budget);
  std::vector<AffineMap> maps;
  std::vector<double> probs;
  maps.reserve(count);
  probs.reserve(count);
  const std::vector<const DiscreteMeasure*> trailing(s.order() - 1, &nu);
  for (std::size_t j = 0; j < s.size(); ++j)
    detail::for_each_weighted_tuple(trailing, [&](std::span<const std::span<const double>> b,
                                                  const std::vector<std::size_t>& idx) {
      double w = p.probs()[j];
      for (std::size_t i = 0; i < idx.size(); ++i) w *= nu.weight(idx[i]);
      maps.push_back(s.maps()[j].induced(b));
      probs.push_back(w);
    });
  return {FiniteIfs(std::move(maps)), std::move(probs)};
}

/// One step of the Markov operator of a finite IFS with probabilities.
inline DiscreteMeasure ifsp_step(const InducedIfsP& r, const DiscreteMeasure& mu, const MarkovOptions& opts = {},
                                 MergeStats* stats = nullptr) {
  require_same_dim(r.ifs.dim(), mu.dim());
  const std::size_t raw = detail::saturating_mul(r.ifs.size(), mu.size());
  if (raw > opts.atom_budget) throw BudgetExceeded("product support size", raw, opts.atom_budget);
  const std::size_t d = mu.dim();
  auto emit_all = [&](auto&& sink) {
    std::vector<double> image(d);
    for (std::size_t t = 0; t < r.ifs.size(); ++t) {
      const auto& psi = r.ifs.maps()[t];
      for (std::size_t a = 0; a < mu.size(); ++a) {
        psi.apply(mu.atom(a), image);
        sink(image, r.probs[t] * mu.weight(a));
      }
    }
  };
  return detail::collect_images(d, raw, r.ifs.image_box(mu.atoms().bbox()), opts, stats, emit_all);
}

/// Markov operator of the system induced by (B, nu), built as an explicit
/// finite IFS with probabilities. Agrees bit for bit with
/// markov_step_gifsp(p, (mu, nu, ..., nu)).
inline DiscreteMeasure markov_step_induced(const GifsP& p, const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                                           const MarkovOptions& opts = {}, MergeStats* stats = nullptr) {
  return ifsp_step(induce_ifsp(p, nu, opts.atom_budget), mu, opts, stats);
}

struct HutchinsonOptions {
  /// Per-step binning width; nonpositive selects tol * (1 - lambda) / sqrt(d).
  double delta = -1.0;
  double w_min = kDefaultWeightFloor;
  std::size_t atom_budget = kDefaultAtomBudget;
  std::size_t map_budget = kDefaultMapBudget;
  std::size_t iteration_cap = kDefaultIterationCap;
};

struct HutchinsonResult {
  DiscreteMeasure measure;
  ConvergenceReport report;
};

/// Iterates the induced Markov operator from mu0 until the certified MK
/// distance to its invariant measure is at most tol. The contraction factor
/// is lambda = sum_j q_j a_1^(j); every step adds its binning error and the
/// transport cost of merged light atoms to the ledger.
inline HutchinsonResult hutchinson_measure(const GifsP& p, const DiscreteMeasure& nu, const DiscreteMeasure& mu0,
                                           double tol, const HutchinsonOptions& opts = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("hutchinson_measure: tol must be positive");
  const std::size_t d = p.system().dim();
  require_same_dim(d, nu.dim());
  require_same_dim(d, mu0.dim());
  const double lambda = p.average_first_lip();
  const double delta = opts.delta > 0.0 ? opts.delta : default_prune_delta(tol, lambda, d);

  ConvergenceReport report;
  MarkovOptions exact{opts.w_min, 0.0, opts.atom_budget};
  MarkovOptions binned{opts.w_min, delta, opts.atom_budget};
  DiscreteMeasure current = mu0;
  try {
    const InducedIfsP induced = induce_ifsp(p, nu, opts.map_budget);
    MergeStats first_stats;
    const DiscreteMeasure first = ifsp_step(induced, mu0, exact, &first_stats);
    const double d01 = mk_distance(mu0, first) + first_stats.transport_bound;
    report.ledger = OstrowskiLedger(lambda, d01);
    for (std::size_t k = 1; k <= opts.iteration_cap; ++k) {
      MergeStats stats;
      DiscreteMeasure next = k == 1 ? merge_light_atoms(bin_to_grid(first, delta), opts.w_min, &stats)
                                    : ifsp_step(induced, current, binned, &stats);
      // The first step starts from the exact image whose merge cost is
      // already part of d01.
      report.ledger.push(grid_snap_error(delta, d) + stats.transport_bound);
      report.sizes.push_back(next.size());
      report.iterations = k;
      current = std::move(next);
      if (report.ledger.final_bound() <= tol) {
        report.converged = true;
        break;
      }
      const double picard = std::pow(lambda, static_cast<double>(k)) / (1.0 - lambda) * d01;
      if (picard < 1e-6 * tol) {
        report.note = "binning floor above tolerance";
        break;
      }
    }
  } catch (const BudgetExceeded& e) {
    report.budget_exceeded = true;
    report.note = e.what();
  }
  if (!report.converged && report.note.empty()) report.note = "iteration cap reached";
  return {std::move(current), std::move(report)};
}

/// Point mass at the fixed point of the first induced map for B = {b}.
inline DiscreteMeasure default_measure_seed(const GifsP& p, std::span<const double> b) {
  const auto& phi = p.system().maps().front();
  std::vector<std::span<const double>> trailing(p.system().order() - 1, b);
  return DiscreteMeasure::dirac(phi.induced(trailing).fixed_point());
}

struct JointOptions {
  std::size_t map_budget = kDefaultMapBudget;
  AttractorOptions set_inner;
  HutchinsonOptions measure_inner;
  double beta_growth = 1.5;
};

struct JointEvaluation {
  PointSet set;
  DiscreteMeasure measure;
  ConvergenceReport set_report;
  ConvergenceReport measure_report;
  PointSet subset;  // B^beta actually used
  double beta = 0.0;
};

/// EV_S(B, nu) on the beta-dense subset B^beta of B, with nu moved onto its
/// nearest points in B^beta (an MK displacement below beta). Both inner
/// solves are certified to sigma.
inline JointEvaluation joint_evaluation(const GifsP& p, const PointSet& b, const DiscreteMeasure& nu, double beta,
                                        double sigma, const JointOptions& opts = {}) {
  const GifsSystem& s = p.system();
  require_same_dim(s.dim(), b.dim());
  require_same_dim(s.dim(), nu.dim());
  if (!(sigma > 0.0)) throw std::invalid_argument("joint_evaluation: sigma must be positive");
  // supp(nu) must lie in B up to the dedup radius.
  const double slack = std::max(b.dedup_tolerance(), nu.atoms().dedup_tolerance()) +
                       1e-12 * std::max(1.0, b.bbox().diagonal());
  if (directed_distance(nu.atoms(), b) > slack)
    throw std::invalid_argument("joint_evaluation: the support of nu is not contained in B");

  PointSet subset = beta > 0.0 ? beta_dense_subset(b, beta) : b;
  if (s.order() > 1) {
    while (beta > 0.0 &&
           detail::saturating_mul(s.size(), detail::saturating_pow(subset.size(), s.order() - 1)) > opts.map_budget) {
      beta *= opts.beta_growth;
      subset = beta_dense_subset(b, beta);
    }
  }
  const DiscreteMeasure nu_beta = project_onto(nu, subset);
  const FiniteIfs ifs = induce_ifs(s, subset, opts.map_budget);
  AttractorResult set = attractor(ifs, sigma, opts.set_inner);
  const DiscreteMeasure mu0 = default_measure_seed(p, subset[0]);
  HutchinsonResult measure = hutchinson_measure(p, nu_beta, mu0, sigma, opts.measure_inner);
  return {std::move(set.set), std::move(measure.measure), std::move(set.report), std::move(measure.report),
          std::move(subset), beta};
}

/// max(hausdorff, mk_distance): the product metric in which EV_S contracts.
inline double d_max(const PointSet& a, const DiscreteMeasure& mu, const PointSet& b, const DiscreteMeasure& nu) {
  return std::max(hausdorff(a, b), mk_distance(mu, nu));
}

struct JointIterateOptions {
  JointOptions joint;
  /// Record d_max between consecutive iterates (one transport solve each).
  bool track_steps = false;
  /// Stop early once the certified bound is at most this (0 disables).
  double stop_below = 0.0;
};

struct JointIterateResult {
  PointSet set;
  DiscreteMeasure measure;
  OstrowskiLedger ledger;
  std::vector<double> step_dmax;  // d_max(X_k, X_{k-1}) when tracked
  std::vector<std::size_t> set_sizes;
  std::vector<std::size_t> measure_sizes;
  bool budget_exceeded = false;
  std::string note;
};

/// Iterates EV_S from (B_0, nu_0). eps_k = c * beta_k + sigma_k with c the
/// joint contraction factor, plus the distance the measure moves when it is
/// snapped onto the new set; d01 = d_max(X_0, X_1) + eps_1.
inline JointIterateResult joint_iterate(const GifsP& p, const PointSet& b0, const DiscreteMeasure& nu0,
                                        const Schedules& sched, std::size_t steps,
                                        const JointIterateOptions& opts = {}) {
  if (steps == 0) throw std::invalid_argument("joint_iterate: K must be positive");
  const double c = p.joint_contraction();
  JointIterateResult out{b0, nu0, OstrowskiLedger(c, 0.0), {}, {}, {}, false, {}};
  const bool single = p.system().order() == 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    // With one argument the induced system ignores B, so no subsampling.
    const double beta = single ? 0.0 : sched.beta(k);
    const double sigma = sched.sigma(k);
    try {
      JointEvaluation ev = joint_evaluation(p, out.set, out.measure, beta, sigma, opts.joint);
      std::string note;
      if (ev.set_report.budget_exceeded || ev.measure_report.budget_exceeded) {
        out.budget_exceeded = true;
        out.note = "inner solve at step " + std::to_string(k) + ": " +
                   (ev.set_report.budget_exceeded ? ev.set_report.note : ev.measure_report.note);
        break;
      }
      const double set_err = ev.set_report.converged ? sigma : std::max(sigma, ev.set_report.bound());
      double measure_err = ev.measure_report.converged ? sigma : std::max(sigma, ev.measure_report.bound());
      if (std::max(set_err, measure_err) > sigma)
        note = "inner bound " + std::to_string(std::max(set_err, measure_err)) + " exceeds sigma";
      if (ev.beta > beta) note += (note.empty() ? "" : "; ") + std::string("beta raised for the map budget");
      // The next evaluation needs supp(nu) inside B: move the measure onto
      // the computed set and charge the displacement to this step.
      measure_err += directed_distance(ev.measure.atoms(), ev.set);
      ev.measure = project_onto(ev.measure, ev.set);
      const double eps = c * ev.beta + std::max(set_err, measure_err);
      const double step = (opts.track_steps || k == 1) ? d_max(out.set, out.measure, ev.set, ev.measure) : 0.0;
      if (opts.track_steps) out.step_dmax.push_back(step);
      out.ledger.push(eps, ev.beta, sigma, note);
      if (k == 1) out.ledger.set_d01(step + eps);
      out.set_sizes.push_back(ev.set.size());
      out.measure_sizes.push_back(ev.measure.size());
      out.set = std::move(ev.set);
      out.measure = std::move(ev.measure);
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
