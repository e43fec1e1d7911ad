#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/grid.hpp"
#include "gifs/markov.hpp"
#include "gifs/measure.hpp"
#include "gifs/point_set.hpp"

namespace gifs {

/// SplitMix64 (Steele, Lea and Flood): the k-th output is a fixed mixing
/// function of seed + k * 0x9E3779B97F4A7C15, so streams are reproducible on
/// any platform with 64-bit unsigned arithmetic.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Inverse-CDF sampler over a finite probability vector.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> probs) : cdf_(probs.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cdf_[i] = acc += probs[i];
    if (cdf_.empty()) throw std::invalid_argument("DiscreteSampler: no outcomes");
  }

  std::size_t operator()(SplitMix64& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

struct OrbitConfig {
  Point seed_point;
  std::uint64_t rng_seed = 0;
  std::size_t burn_in = 0;
  /// Total number of steps; the orbit keeps the last length - burn_in.
  std::size_t length = 1;
};

/// Row-major list of orbit points.
struct Orbit {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
  PointSet to_set() const { return PointSet(dim, coords); }
};

/// Chaos game for the system induced by nu: each step draws j ~ q and
/// b_2, ..., b_m i.i.d. from nu, then moves x to phi_j(x, b_2, ..., b_m).
inline Orbit random_orbit(const GifsP& p, const DiscreteMeasure& nu, const OrbitConfig& cfg) {
  const GifsSystem& s = p.system();
  require_same_dim(s.dim(), nu.dim());
  require_same_dim(s.dim(), cfg.seed_point.size());
  if (cfg.length <= cfg.burn_in) throw std::invalid_argument("random_orbit: length must exceed burn_in");
  const std::size_t d = s.dim();
  const DiscreteSampler pick_map(p.probs());
  const DiscreteSampler pick_atom(nu.weights());
  SplitMix64 rng(cfg.rng_seed);

  Orbit out{d, {}};
  out.coords.reserve((cfg.length - cfg.burn_in) * d);
  Point x = cfg.seed_point, y(d);
  std::vector<std::span<const double>> args(s.order());
  for (std::size_t k = 1; k <= cfg.length; ++k) {
    const auto& phi = s.maps()[pick_map(rng)];
    args[0] = x;
    for (std::size_t i = 1; i < s.order(); ++i) args[i] = nu.atom(pick_atom(rng));
    phi.apply(args, y);
    std::swap(x, y);
    if (k > cfg.burn_in) out.coords.insert(out.coords.end(), x.begin(), x.end());
  }
  return out;
}

/// Built-in test functions R^d -> R, looked up by name:
///   identity     x (one-dimensional systems only)
///   coord:i      i-th coordinate
///   norm         Euclidean norm
///   const:c      the constant c
///   cos:k        cos(k * x_0)
///   tent:c:r     max(0, 1 - |x_0 - c| / r)
struct Observable {
  std::string name;
  std::function<double(std::span<const double>)> f;

  double operator()(std::span<const double> x) const { return f(x); }
};

inline Observable make_observable(std::string_view name, std::size_t dim) {
  auto number = [&](std::string_view t) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
      throw std::invalid_argument("observable '" + std::string(name) + "': bad number '" + std::string(t) + "'");
    return v;
  };
  const std::string label(name);
  if (name == "identity") {
    if (dim != 1) throw std::invalid_argument("observable 'identity' needs a one-dimensional system; use coord:i");
    return {label, [](std::span<const double> x) { return x[0]; }};
  }
  if (name == "norm")
    return {label, [](std::span<const double> x) {
              double s = 0.0;
              for (double v : x) s += v * v;
              return std::sqrt(s);
            }};
  if (name.rfind("coord:", 0) == 0) {
    const double i = number(name.substr(6));
    if (i < 0 || i != std::floor(i) || i >= static_cast<double>(dim))
      throw std::invalid_argument("observable '" + label + "': coordinate out of range");
    const auto k = static_cast<std::size_t>(i);
    return {label, [k](std::span<const double> x) { return x[k]; }};
  }
  if (name.rfind("const:", 0) == 0) {
    const double c = number(name.substr(6));
    return {label, [c](std::span<const double>) { return c; }};
  }
  if (name.rfind("cos:", 0) == 0) {
    const double k = number(name.substr(4));
    return {label, [k](std::span<const double> x) { return std::cos(k * x[0]); }};
  }
  if (name.rfind("tent:", 0) == 0) {
    const auto rest = name.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("observable 'tent' expects tent:c:r");
    const double c = number(rest.substr(0, colon));
    const double r = number(rest.substr(colon + 1));
    if (!(r > 0.0)) throw std::invalid_argument("observable 'tent': radius must be positive");
    return {label, [c, r](std::span<const double> x) { return std::max(0.0, 1.0 - std::abs(x[0] - c) / r); }};
  }
  throw std::invalid_argument("unknown observable '" + label +
                              "' (known: identity, coord:i, norm, const:c, cos:k, tent:c:r)");
}

/// Mean of f over the orbit points.
inline double ergodic_average(const Orbit& orbit, const Observable& f) {
  if (orbit.size() == 0) throw std::invalid_argument("ergodic_average: empty orbit");
  std::vector<double> values(orbit.size());
  for (std::size_t i = 0; i < orbit.size(); ++i) values[i] = f(orbit[i]);
  return compensated_sum(values) / static_cast<double>(orbit.size());
}

inline double ergodic_average(const Orbit& orbit, std::string_view name) {
  return ergodic_average(orbit, make_observable(name, orbit.dim));
}

/// Equal-weight empirical measure of the orbit, binned on a lattice of
/// spacing delta.
inline DiscreteMeasure empirical_measure(const Orbit& orbit, double delta) {
  if (orbit.size() == 0) throw std::invalid_argument("empirical_measure: empty orbit");
  const double w = 1.0 / static_cast<double>(orbit.size());
  CellMass cells(orbit.dim, delta, bounding_box(orbit.dim, orbit.coords));
  for (std::size_t i = 0; i < orbit.size(); ++i) cells.add(orbit[i], w);
  auto [centers, weights] = cells.collect();
  return DiscreteMeasure(PointSet(PointSet::canonical, orbit.dim, std::move(centers)), std::move(weights));
}

}  // namespace gifs
