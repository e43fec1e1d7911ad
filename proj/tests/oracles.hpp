#pragma once

// Independent reference computations used by the tests. Each one is the
// slow, obvious version of something the library does cleverly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "gifs.hpp"

namespace oracle {

/// Directed distance by scanning every pair.
inline double directed(const gifs::PointSet& a, const gifs::PointSet& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) best = std::min(best, gifs::distance(a[i], b[j]));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff(const gifs::PointSet& a, const gifs::PointSet& b) {
  return std::max(directed(a, b), directed(b, a));
}

/// Hausdorff distance from a 1-D point set to the interval [lo, hi]:
/// the larger of the worst point outside and the widest uncovered gap.
inline double hausdorff_to_interval(const gifs::PointSet& a, double lo, double hi) {
  std::vector<double> xs;
  for (std::size_t i = 0; i < a.size(); ++i) xs.push_back(a[i][0]);
  std::sort(xs.begin(), xs.end());
  double out = 0.0;
  for (double x : xs) out = std::max(out, std::max(lo - x, x - hi));
  std::vector<double> inside;
  for (double x : xs) inside.push_back(std::clamp(x, lo, hi));
  out = std::max(out, inside.front() - lo);
  out = std::max(out, hi - inside.back());
  for (std::size_t i = 1; i < inside.size(); ++i) out = std::max(out, (inside[i] - inside[i - 1]) / 2.0);
  return out;
}

/// W1 on the line: integral of |F_mu - F_nu|.
inline double w1_cdf(const gifs::DiscreteMeasure& mu, const gifs::DiscreteMeasure& nu) {
  std::vector<std::pair<double, double>> ev;
  for (std::size_t i = 0; i < mu.size(); ++i) ev.emplace_back(mu.atom(i)[0], mu.weight(i));
  for (std::size_t i = 0; i < nu.size(); ++i) ev.emplace_back(nu.atom(i)[0], -nu.weight(i));
  std::sort(ev.begin(), ev.end());
  double cdf = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    cdf += ev[i].second;
    total += std::abs(cdf) * (ev[i + 1].first - ev[i].first);
  }
  return total;
}

/// For n atoms of weight 1/n on each side an optimal plan is a
/// permutation (Birkhoff); try them all.
inline double w1_assignment(const std::vector<gifs::Point>& xs, const std::vector<gifs::Point>& ys) {
  std::vector<std::size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += gifs::distance(xs[i], ys[perm[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(xs.size());
}

/// Largest singular value of a 2x2 matrix in closed form.
inline double spectral_norm_2x2(double a, double b, double c, double d) {
  const double s1 = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  return std::sqrt((s1 + std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det))) / 2.0);
}

/// Every image phi_j(a, b_2, ..., b_m) for a in A and b_i in B, by
/// explicit odometer enumeration, as a sorted list of exact coordinates.
inline std::vector<gifs::Point> brute_gifs_images(const gifs::GifsSystem& s, const gifs::PointSet& a,
                                                  const gifs::PointSet& b) {
  std::vector<gifs::Point> out;
  const std::size_t m = s.order();
  for (const auto& phi : s.maps())
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::vector<std::size_t> idx(m - 1, 0);
      while (true) {
        std::vector<std::span<const double>> args{a[i]};
        for (std::size_t k = 0; k + 1 < m; ++k) args.push_back(b[idx[k]]);
        out.push_back(phi(args));
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == b.size()) idx[pos++] = 0;
        if (pos == idx.size()) break;
      }
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// All 3^depth compositions of the Sierpinski maps applied to a seed.
inline gifs::PointSet sierpinski_level(const gifs::FiniteIfs& ifs, gifs::Point seed, int depth) {
  std::vector<gifs::Point> layer{std::move(seed)};
  for (int k = 0; k < depth; ++k) {
    std::vector<gifs::Point> next;
    for (const auto& p : layer)
      for (const auto& m : ifs.maps()) next.push_back(m(p));
    layer = std::move(next);
  }
  return gifs::PointSet::from_points(layer);
}

/// Pushforward of the dyadic measure on [0, 1] through the maps x/2 and
/// x/2 + 1/2 `depth` times from a point mass: 2^depth equal atoms.
inline gifs::DiscreteMeasure dyadic_uniform(int depth) {
  const std::size_t n = std::size_t{1} << depth;
  std::vector<double> xs(n), ws(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return gifs::DiscreteMeasure(1, xs, ws);
}

}  // namespace oracle
