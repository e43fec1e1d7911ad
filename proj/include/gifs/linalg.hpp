#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include "gifs/errors.hpp"

namespace gifs {

/// Dense row-major matrix. Only the small square matrices of affine maps
/// flow through here, so there is no expression-template machinery.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw std::invalid_argument("matrix data size mismatch");
  }

  /// Row-major nested initializer, e.g. Matrix{{0.0, 0.6}, {0.0, 0.0}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t d) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix scalar(std::size_t d, double s) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = s;
    return m;
  }

  static Matrix diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  /// Product transpose(this) * this.
  Matrix gram() const {
    Matrix g(cols_, cols_);
    for (std::size_t i = 0; i < cols_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, i) * (*this)(r, j);
        g(i, j) = s;
      }
    return g;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// acc[r] += sum_c m(r, c) * x[c], summed left to right starting from acc[r].
/// Every affine evaluation in the library goes through this kernel so that
/// equal algebraic expressions produce equal bits.
inline void accumulate_product(const Matrix& m, std::span<const double> x, std::span<double> acc) {
  const std::size_t cols = m.cols();
  const double* row = m.data().data();
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    double s = acc[r];
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    acc[r] = s;
  }
}

struct SpectralNormResult {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline SpectralNormResult power_iterate_gram(const Matrix& g, std::vector<double> v, double rel_tol,
                                             std::size_t max_iter) {
  const std::size_t d = g.rows();
  std::vector<double> w(d);
  auto normalize = [](std::vector<double>& x) {
    double n = 0.0;
    for (double e : x) n += e * e;
    n = std::sqrt(n);
    if (n == 0.0) return false;
    for (double& e : x) e /= n;
    return true;
  };
  SpectralNormResult out;
  if (!normalize(v)) {
    out.converged = true;
    return out;
  }
  double lambda = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    accumulate_product(g, v, w);
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < d; ++i) rayleigh += v[i] * w[i];
    out.iterations = it;
    if (std::abs(rayleigh - lambda) <= rel_tol * std::abs(rayleigh)) {
      out.value = std::sqrt(std::max(rayleigh, 0.0));
      out.converged = true;
      return out;
    }
    lambda = rayleigh;
    v = w;
    if (!normalize(v)) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
  }
  out.value = std::sqrt(std::max(lambda, 0.0));
  return out;
}

}  // namespace detail

/// Largest singular value by power iteration on the Gram matrix. Two starts
/// are tried (the dominant Gram column and the all-ones vector) so a start
/// orthogonal to the top singular vector cannot go unnoticed.
inline SpectralNormResult spectral_norm_detailed(const Matrix& m, double rel_tol = 1e-12,
                                                 std::size_t max_iter = 10000) {
  if (!m.all_finite()) throw std::invalid_argument("spectral_norm: non-finite matrix entry");
  if (m.rows() == 0 || m.cols() == 0) return {0.0, 0, true};
  const Matrix g = m.gram();
  const std::size_t d = g.rows();

  std::size_t best_col = 0;
  double best_norm = -1.0;
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) s += g(r, c) * g(r, c);
    if (s > best_norm) {
      best_norm = s;
      best_col = c;
    }
  }
  if (best_norm == 0.0) return {0.0, 0, true};

  std::vector<double> start_col(d), start_ones(d, 1.0);
  for (std::size_t r = 0; r < d; ++r) start_col[r] = g(r, best_col);

  const auto a = detail::power_iterate_gram(g, std::move(start_col), rel_tol, max_iter);
  const auto b = detail::power_iterate_gram(g, std::move(start_ones), rel_tol, max_iter);
  SpectralNormResult out = a.value >= b.value ? a : b;
  out.iterations = a.iterations + b.iterations;
  out.converged = a.converged && b.converged;
  return out;
}

/// Operator 2-norm of `m`. Throws NonConvergence if the iteration cap is hit;
/// frobenius_norm() is the caller's upper-bound fallback.
inline double spectral_norm(const Matrix& m) {
  const auto r = spectral_norm_detailed(m);
  if (!r.converged)
    throw NonConvergence("spectral_norm: power iteration hit the cap after " +
                         std::to_string(r.iterations) + " iterations");
  return r.value;
}

/// Solves a * x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::invalid_argument("solve_linear: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    x[r] = s / a(r, r);
  }
  return x;
}

/// Spectral norm, or the Frobenius norm when power iteration stalls.
inline double lipschitz_upper(const Matrix& m) {
  const auto r = spectral_norm_detailed(m);
  return r.converged ? r.value : m.frobenius_norm();
}

}  // namespace gifs
