#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gifs.hpp"

namespace fixture {

using gifs::Matrix;
using gifs::MultiAffineMap;
using gifs::Point;

/// phi_1(x, y) = (x + y)/4, phi_2(x, y) = (x + y)/4 + 1/2 on the line.
/// Its attractor is [0, 1].
inline gifs::GifsSystem quarter_pair() {
  std::vector<MultiAffineMap> maps;
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.25}}, Matrix{{0.25}}}, Point{0.0});
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.25}}, Matrix{{0.25}}}, Point{0.5});
  return gifs::GifsSystem(std::move(maps));
}

inline gifs::GifsP quarter_pair_p() { return gifs::GifsP(quarter_pair(), {0.5, 0.5}); }

/// x/2 and x/2 + 1/2: attractor [0, 1], invariant measure Lebesgue.
inline gifs::FiniteIfs halves() {
  return gifs::FiniteIfs({gifs::AffineMap(Matrix{{0.5}}, {0.0}), gifs::AffineMap(Matrix{{0.5}}, {0.5})});
}

inline gifs::GifsSystem halves_gifs() {
  std::vector<MultiAffineMap> maps;
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.5}}}, Point{0.0});
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.5}}}, Point{0.5});
  return gifs::GifsSystem(std::move(maps));
}

inline const std::vector<Point>& sierpinski_vertices() {
  static const std::vector<Point> v{{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
  return v;
}

/// Three maps x -> x/2 + v/2 towards the triangle vertices.
inline gifs::FiniteIfs sierpinski() {
  std::vector<gifs::AffineMap> maps;
  for (const auto& v : sierpinski_vertices())
    maps.emplace_back(Matrix::scalar(2, 0.5), Point{v[0] / 2.0, v[1] / 2.0});
  return gifs::FiniteIfs(std::move(maps));
}

inline gifs::GifsSystem sierpinski_gifs() {
  std::vector<MultiAffineMap> maps;
  for (const auto& v : sierpinski_vertices())
    maps.emplace_back(std::vector<Matrix>{Matrix::scalar(2, 0.5)}, Point{v[0] / 2.0, v[1] / 2.0});
  return gifs::GifsSystem(std::move(maps));
}

/// Random d x d matrix with spectral norm exactly `norm` (up to rounding).
inline Matrix random_matrix(gifs::SplitMix64& rng, std::size_t d, double norm) {
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = 2.0 * rng.uniform() - 1.0;
  const double s = gifs::spectral_norm(m);
  if (s == 0.0) return Matrix::scalar(d, norm);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) *= norm / s;
  return m;
}

/// Random contractive GIFS with n maps of order m in dimension d; every
/// map's argument Lipschitz constants sum to at most `budget`.
inline gifs::GifsSystem random_gifs(gifs::SplitMix64& rng, std::size_t n, std::size_t m, std::size_t d,
                                    double budget = 0.8) {
  std::vector<MultiAffineMap> maps;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> share(m);
    double total = 0.0;
    for (auto& s : share) total += s = 0.1 + rng.uniform();
    std::vector<Matrix> mats;
    for (std::size_t i = 0; i < m; ++i) mats.push_back(random_matrix(rng, d, budget * share[i] / total * 0.999));
    Point c(d);
    for (auto& x : c) x = 2.0 * rng.uniform() - 1.0;
    maps.emplace_back(std::move(mats), std::move(c));
  }
  return gifs::GifsSystem(std::move(maps));
}

inline gifs::PointSet random_set(gifs::SplitMix64& rng, std::size_t count, std::size_t d, double lo = -1.0,
                                 double hi = 1.0) {
  std::vector<double> coords(count * d);
  for (auto& x : coords) x = lo + (hi - lo) * rng.uniform();
  return gifs::PointSet(d, std::move(coords));
}

inline gifs::DiscreteMeasure random_measure(gifs::SplitMix64& rng, std::size_t count, std::size_t d,
                                            double lo = -1.0, double hi = 1.0) {
  std::vector<double> coords(count * d), w(count);
  for (auto& x : coords) x = lo + (hi - lo) * rng.uniform();
  double total = 0.0;
  for (auto& x : w) total += x = 0.05 + rng.uniform();
  for (auto& x : w) x /= total;
  return gifs::DiscreteMeasure(d, std::move(coords), std::move(w));
}

}  // namespace fixture
