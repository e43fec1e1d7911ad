#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gifs/point_set.hpp"

namespace gifs::io {

/// Axis-aligned window [x_lo, x_hi] x [y_lo, y_hi] mapped onto the canvas.
struct Window {
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
};

/// 8-bit grayscale image, row 0 at the top.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t col, std::size_t row) const { return pixels[row * width + col]; }
  std::size_t lit_count() const {
    std::size_t n = 0;
    for (auto p : pixels) n += p != 0;
    return n;
  }

  /// Binary PGM (P5), maxval 255.
  std::string to_pgm() const {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(pixels.begin(), pixels.end());
    return out;
  }
};

/// Bounding box of the set, widened to a nonzero extent on each axis.
inline Window fit_window(const PointSet& a) {
  const auto box = a.bbox();
  auto widen = [](double lo, double hi, double& out_lo, double& out_hi) {
    const double pad = hi > lo ? 0.0 : std::max(1.0, std::abs(lo)) * 0.5;
    out_lo = lo - pad;
    out_hi = hi + pad;
  };
  Window w;
  widen(box.lo[0], box.hi[0], w.x_lo, w.x_hi);
  if (a.dim() >= 2)
    widen(box.lo[1], box.hi[1], w.y_lo, w.y_hi);
  else
    w.y_lo = 0.0, w.y_hi = 1.0;
  return w;
}

/// Lights the pixel nearest to every point inside the window. Pixel
/// centers sit on a regular grid whose corners are the window corners;
/// coordinates are rounded half up. Pixel (col, row) with row counted from
/// the bottom holds y_lo at row 0, so the image is stored flipped. A
/// one-dimensional set becomes a strip: every row repeats the x pattern.
inline Raster render_pointset(const PointSet& a, std::size_t width, std::size_t height,
                              const std::optional<Window>& window = std::nullopt) {
  if (a.dim() > 2)
    throw std::invalid_argument("render_pointset: dimension " + std::to_string(a.dim()) +
                                " is not drawable; project onto a coordinate pair first (--project i,j)");
  if (width == 0 || height == 0) throw std::invalid_argument("render_pointset: empty canvas");
  const Window w = window ? *window : fit_window(a);
  if (!(w.x_hi > w.x_lo) || (a.dim() == 2 && !(w.y_hi > w.y_lo)))
    throw std::invalid_argument("render_pointset: degenerate window");
  Raster r{width, height, std::vector<std::uint8_t>(width * height, 0)};
  auto index = [](double v, double lo, double hi, std::size_t n) -> std::optional<std::size_t> {
    if (v < lo || v > hi) return std::nullopt;
    const double t = n == 1 ? 0.0 : (v - lo) / (hi - lo) * static_cast<double>(n - 1);
    return static_cast<std::size_t>(std::floor(t + 0.5));
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto p = a[i];
    const auto col = index(p[0], w.x_lo, w.x_hi, width);
    if (!col) continue;
    if (a.dim() == 1) {
      for (std::size_t row = 0; row < height; ++row) r.pixels[row * width + *col] = 255;
      continue;
    }
    const auto up = index(p[1], w.y_lo, w.y_hi, height);
    if (!up) continue;
    r.pixels[(height - 1 - *up) * width + *col] = 255;
  }
  return r;
}

/// Keeps coordinates i and j of every point.
inline PointSet project_pair(const PointSet& a, std::size_t i, std::size_t j) {
  if (i >= a.dim() || j >= a.dim()) throw std::invalid_argument("projection coordinate out of range");
  std::vector<double> coords;
  coords.reserve(a.size() * 2);
  for (std::size_t k = 0; k < a.size(); ++k) {
    coords.push_back(a[k][i]);
    coords.push_back(a[k][j]);
  }
  return PointSet(2, std::move(coords));
}

}  // namespace gifs::io
