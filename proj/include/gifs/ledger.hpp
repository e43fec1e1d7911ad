#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gifs {

/// Error ledger for a fixed-point iteration with inexact steps. With a
/// contraction factor alpha, an initial displacement bound d01 >=
/// d(x0, T x0) and per-step inexactness eps_i >= d(y_i, T y_{i-1}):
///
///   d(y_k, p) <= alpha^k / (1 - alpha) * d01 + sum_{i=1..k} alpha^(k-i) eps_i
///
/// Rows are 1-based to match the iteration count; bound(0) is the a-priori
/// bound on the starting point.
class OstrowskiLedger {
 public:
  OstrowskiLedger() = default;
  OstrowskiLedger(double alpha, double d01) : alpha_(alpha), d01_(d01) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("ledger: alpha must lie in [0, 1)");
    if (!(d01 >= 0.0)) throw std::invalid_argument("ledger: d01 must be nonnegative");
  }

  /// Closed-form estimate evaluated term by term in increasing i. Terms are
  /// summed in long double so the stored double is within an ulp or so of
  /// the exact value for any k.
  static double estimate(double alpha, double d01, std::span<const double> eps, std::size_t k) {
    const long double a = alpha;
    long double s = std::pow(a, static_cast<long double>(k)) / (1.0L - a) * d01;
    for (std::size_t i = 1; i <= k; ++i) s += std::pow(a, static_cast<long double>(k - i)) * eps[i - 1];
    return static_cast<double>(s);
  }

  /// Appends eps_k with optional schedule values for the record.
  void push(double eps, double beta = std::numeric_limits<double>::quiet_NaN(),
            double sigma = std::numeric_limits<double>::quiet_NaN(), std::string note = {}) {
    if (!(eps >= 0.0)) throw std::invalid_argument("ledger: eps must be nonnegative");
    eps_.push_back(eps);
    beta_.push_back(beta);
    sigma_.push_back(sigma);
    notes_.push_back(std::move(note));
    bounds_.push_back(estimate(alpha_, d01_, eps_, eps_.size()));
  }

  /// d01 is usually only known after the first step; resetting it
  /// recomputes every stored bound.
  void set_d01(double d01) {
    if (!(d01 >= 0.0)) throw std::invalid_argument("ledger: d01 must be nonnegative");
    d01_ = d01;
    for (std::size_t k = 1; k <= eps_.size(); ++k) bounds_[k - 1] = estimate(alpha_, d01_, eps_, k);
  }

  double alpha() const noexcept { return alpha_; }
  double d01() const noexcept { return d01_; }
  std::size_t steps() const noexcept { return eps_.size(); }

  const std::vector<double>& eps() const noexcept { return eps_; }
  const std::vector<double>& beta() const noexcept { return beta_; }
  const std::vector<double>& sigma() const noexcept { return sigma_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }
  /// bounds()[k-1] is the bound after step k.
  const std::vector<double>& bounds() const noexcept { return bounds_; }

  double bound(std::size_t k) const {
    if (k == 0) return d01_ / (1.0 - alpha_);
    return bounds_.at(k - 1);
  }

  /// Bound after the last recorded step (the a-priori bound if none).
  double final_bound() const { return bound(steps()); }

 private:
  double alpha_ = 0.0;
  double d01_ = 0.0;
  std::vector<double> eps_;
  std::vector<double> beta_;
  std::vector<double> sigma_;
  std::vector<std::string> notes_;
  std::vector<double> bounds_;
};

/// Per-call record of an inner fixed-point solve.
struct ConvergenceReport {
  OstrowskiLedger ledger;
  std::vector<double> step_distance;  // measured h(A_k, A_{k-1})
  std::vector<std::size_t> sizes;     // cardinality after each step
  std::size_t iterations = 0;
  bool converged = false;
  bool budget_exceeded = false;
  std::string note;

  double bound() const { return ledger.final_bound(); }
};

}  // namespace gifs
