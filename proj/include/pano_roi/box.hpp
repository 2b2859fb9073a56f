#pragma once

#include <algorithm>
#include <vector>

#include "pano_roi/raster.hpp"

namespace pano_roi {

// Axis-aligned rectangle on the ERP pixel grid. Covers columns [x, x+w) and
// rows [y, y+h); never crosses the longitudinal seam.
struct RegionBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  constexpr int right() const noexcept { return x + w; }
  constexpr int bottom() const noexcept { return y + h; }
  constexpr long long area() const noexcept {
    return static_cast<long long>(w) * h;
  }
  constexpr double center_x() const noexcept { return x + 0.5 * w; }
  constexpr double center_y() const noexcept { return y + 0.5 * h; }

  constexpr bool operator==(const RegionBox&) const = default;
};

constexpr bool is_valid(const RegionBox& b, ImageDims dims) noexcept {
  return b.w >= 1 && b.h >= 1 && b.x >= 0 && b.y >= 0 && b.right() <= dims.width &&
         b.bottom() <= dims.height;
}

inline void check_box(const RegionBox& b, ImageDims dims) {
  if (!is_valid(b, dims)) {
    fail(ErrorKind::contract,
         "region (" + std::to_string(b.x) + "," + std::to_string(b.y) + "," +
             std::to_string(b.w) + "," + std::to_string(b.h) + ") outside " +
             std::to_string(dims.width) + "x" + std::to_string(dims.height));
  }
}

constexpr long long intersection_area(const RegionBox& a, const RegionBox& b) noexcept {
  const int iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const int ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0;
  return static_cast<long long>(iw) * ih;
}

// Plain intersection-over-union; no wrap at the seam.
constexpr double iou(const RegionBox& a, const RegionBox& b) noexcept {
  const long long inter = intersection_area(a, b);
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

constexpr RegionBox bounding_union(const RegionBox& a, const RegionBox& b) noexcept {
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0,
          std::max(a.bottom(), b.bottom()) - y0};
}

// Maps a box between grids of different resolution, keeping it inside the
// target and at least one pixel large.
inline RegionBox rescale_box(const RegionBox& b, ImageDims from, ImageDims to) {
  if (from == to) return b;
  const double sx = static_cast<double>(to.width) / from.width;
  const double sy = static_cast<double>(to.height) / from.height;
  const int x0 = std::clamp(static_cast<int>(std::lround(b.x * sx)), 0, to.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::lround(b.y * sy)), 0, to.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::lround(b.right() * sx)), x0 + 1, to.width);
  const int y1 = std::clamp(static_cast<int>(std::lround(b.bottom() * sy)), y0 + 1, to.height);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace pano_roi
