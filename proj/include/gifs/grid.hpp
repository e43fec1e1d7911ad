#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gifs/point_set.hpp"

namespace gifs {

/// Integer lattice of cubes with side `delta`; cell k along an axis covers
/// [k*delta, (k+1)*delta) and is represented by its center (k + 0.5)*delta.
class CellLattice {
 public:
  CellLattice(std::size_t dim, double delta, const BoundingBox& box) : dim_(dim), delta_(delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("cell size must be positive");
    lo_.resize(dim);
    extent_.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double a = std::floor(box.lo[k] / delta) - 1.0;
      const double b = std::floor(box.hi[k] / delta) + 1.0;
      if (!(std::abs(a) < 4e18 && std::abs(b) < 4e18))
        throw std::invalid_argument("cell index overflow: cell size too small for the coordinate range");
      lo_[k] = static_cast<std::int64_t>(a);
      extent_[k] = static_cast<std::uint64_t>(static_cast<std::int64_t>(b) - lo_[k] + 1);
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  double delta() const noexcept { return delta_; }

  std::int64_t axis_key(double x, std::size_t k) const {
    const auto key = static_cast<std::int64_t>(std::floor(x / delta_)) - lo_[k];
    if (key < 0 || static_cast<std::uint64_t>(key) >= extent_[k])
      throw std::logic_error("point outside the lattice bounding box");
    return key;
  }

  double center(std::int64_t key, std::size_t k) const {
    return (static_cast<double>(key + lo_[k]) + 0.5) * delta_;
  }

  /// Number of cells in the box, saturating at uint64 max.
  std::uint64_t cell_count() const {
    std::uint64_t total = 1;
    for (auto e : extent_) {
      if (e != 0 && total > std::numeric_limits<std::uint64_t>::max() / e)
        return std::numeric_limits<std::uint64_t>::max();
      total *= e;
    }
    return total;
  }

  bool packable() const {
    int bits = 0;
    for (auto e : extent_) bits += bit_width(e);
    return bits <= 63;
  }

  /// Row-major linear index, axis 0 most significant, so ordering by index
  /// equals lexicographic ordering of centers.
  std::uint64_t linear(std::span<const double> p) const {
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < dim_; ++k) idx = idx * extent_[k] + static_cast<std::uint64_t>(axis_key(p[k], k));
    return idx;
  }

  void append_center(std::uint64_t idx, std::vector<double>& out) const {
    const std::size_t base = out.size();
    out.resize(base + dim_);
    for (std::size_t k = dim_; k-- > 0;) {
      out[base + k] = center(static_cast<std::int64_t>(idx % extent_[k]), k);
      idx /= extent_[k];
    }
  }

 private:
  static int bit_width(std::uint64_t v) {
    int b = 0;
    while (v > 0) {
      ++b;
      v >>= 1;
    }
    return b;
  }

  std::size_t dim_;
  double delta_;
  std::vector<std::int64_t> lo_;
  std::vector<std::uint64_t> extent_;
};

/// Expands a bounding box by a relative margin so floating-point images of
/// points inside an interval-arithmetic enclosure stay inside.
inline BoundingBox padded(BoundingBox box) {
  for (std::size_t k = 0; k < box.lo.size(); ++k) {
    const double pad = 1e-9 * (box.hi[k] - box.lo[k] + std::abs(box.lo[k]) + std::abs(box.hi[k])) + 1e-300;
    box.lo[k] -= pad;
    box.hi[k] += pad;
  }
  return box;
}

/// Collects occupied lattice cells; yields their centers in lexicographic
/// order. Uses a dense bitmap when the box is small, sorted keys otherwise.
class CellSet {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 26;

  CellSet(std::size_t dim, double delta, const BoundingBox& box) : lattice_(dim, delta, box) {
    const auto cells = lattice_.cell_count();
    if (cells <= kDenseLimit) {
      mode_ = Mode::dense;
      dense_.assign(cells, 0);
    } else if (lattice_.packable()) {
      mode_ = Mode::packed;
    } else {
      mode_ = Mode::generic;
    }
  }

  void insert(std::span<const double> p) {
    switch (mode_) {
      case Mode::dense: {
        auto& slot = dense_[lattice_.linear(p)];
        count_ += slot == 0;
        slot = 1;
        break;
      }
      case Mode::packed:
        packed_.push_back(lattice_.linear(p));
        break;
      case Mode::generic:
        for (std::size_t k = 0; k < lattice_.dim(); ++k) generic_.push_back(lattice_.axis_key(p[k], k));
        break;
    }
  }

  std::vector<double> centers() {
    std::vector<double> out;
    const std::size_t dim = lattice_.dim();
    switch (mode_) {
      case Mode::dense:
        out.reserve(count_ * dim);
        for (std::uint64_t i = 0; i < dense_.size(); ++i)
          if (dense_[i]) lattice_.append_center(i, out);
        break;
      case Mode::packed:
        std::sort(packed_.begin(), packed_.end());
        packed_.erase(std::unique(packed_.begin(), packed_.end()), packed_.end());
        out.reserve(packed_.size() * dim);
        for (auto idx : packed_) lattice_.append_center(idx, out);
        break;
      case Mode::generic: {
        const std::size_t n = generic_.size() / dim;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto key = [&](std::size_t i) { return std::span<const std::int64_t>(generic_).subspan(i * dim, dim); };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          const auto ka = key(a), kb = key(b);
          return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end());
        });
        for (std::size_t i = 0; i < n; ++i) {
          if (i > 0) {
            const auto ka = key(order[i]), kb = key(order[i - 1]);
            if (std::equal(ka.begin(), ka.end(), kb.begin())) continue;
          }
          const auto k = key(order[i]);
          for (std::size_t a = 0; a < dim; ++a) out.push_back(lattice_.center(k[a], a));
        }
        break;
      }
    }
    return out;
  }

 private:
  enum class Mode { dense, packed, generic };
  CellLattice lattice_;
  Mode mode_;
  std::vector<std::uint8_t> dense_;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> packed_;
  std::vector<std::int64_t> generic_;
};

/// Accumulates mass per lattice cell. Weights are summed in insertion order
/// within each cell, so a fixed enumeration order gives reproducible bits.
class CellMass {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 23;

  CellMass(std::size_t dim, double delta, const BoundingBox& box) : lattice_(dim, delta, box) {
    const auto cells = lattice_.cell_count();
    if (cells <= kDenseLimit) {
      dense_ = true;
      mass_.assign(cells, 0.0);
      touched_.assign(cells, 0);
    } else if (!lattice_.packable()) {
      throw std::invalid_argument("measure lattice too large for binning; increase the bin width");
    }
  }

  void add(std::span<const double> p, double w) {
    const auto idx = lattice_.linear(p);
    if (dense_) {
      mass_[idx] += w;
      touched_[idx] = 1;
    } else {
      entries_.emplace_back(idx, w);
    }
  }

  /// Returns (centers row-major, weights) in lexicographic order of centers.
  std::pair<std::vector<double>, std::vector<double>> collect() {
    std::vector<double> centers, weights;
    if (dense_) {
      for (std::uint64_t i = 0; i < mass_.size(); ++i)
        if (touched_[i]) {
          lattice_.append_center(i, centers);
          weights.push_back(mass_[i]);
        }
    } else {
      std::stable_sort(entries_.begin(), entries_.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t i = 0; i < entries_.size();) {
        double w = 0.0;
        std::size_t j = i;
        for (; j < entries_.size() && entries_[j].first == entries_[i].first; ++j) w += entries_[j].second;
        lattice_.append_center(entries_[i].first, centers);
        weights.push_back(w);
        i = j;
      }
    }
    return {std::move(centers), std::move(weights)};
  }

 private:
  CellLattice lattice_;
  bool dense_ = false;
  std::vector<double> mass_;
  std::vector<std::uint8_t> touched_;
  std::vector<std::pair<std::uint64_t, double>> entries_;
};

}  // namespace gifs
