#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pano_roi/error.hpp"

namespace pano_roi {

struct ImageDims {
  int width = 0;
  int height = 0;

  constexpr bool operator==(const ImageDims&) const = default;
  constexpr long long pixel_count() const {
    return static_cast<long long>(width) * height;
  }
  // Full 360x180 coverage.
  constexpr bool is_erp() const { return height > 0 && width == 2 * height; }
};

enum class Interpolation { bilinear, nearest };

// Dense row-major raster with interleaved channels.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) {
      fail(ErrorKind::contract, "raster: invalid shape");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }
  Raster(ImageDims dims, int channels = 1, T fill = T{})
      : Raster(dims.width, dims.height, channels, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  ImageDims dims() const noexcept { return {width_, height_}; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) noexcept {
    return data_[index(x, y, c)];
  }
  const T& operator()(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y, c)];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::span<T> row(int y) noexcept {
    return std::span<T>(data_).subspan(
        static_cast<std::size_t>(y) * width_ * channels_,
        static_cast<std::size_t>(width_) * channels_);
  }
  std::span<const T> row(int y) const noexcept {
    return std::span<const T>(data_).subspan(
        static_cast<std::size_t>(y) * width_ * channels_,
        static_cast<std::size_t>(width_) * channels_);
  }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

// Equirectangular image, samples in [0,1], 1 or 3 channels (RGB order).
using ErpImage = Raster<float>;

inline void check_erp(const ErpImage& img) {
  if (!img.dims().is_erp()) {
    fail(ErrorKind::domain, "ERP image must be exactly twice as wide as tall, got " +
                                std::to_string(img.width()) + "x" +
                                std::to_string(img.height()));
  }
  if (img.channels() != 1 && img.channels() != 3) {
    fail(ErrorKind::domain, "ERP image must have 1 or 3 channels");
  }
  for (float v : img.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      fail(ErrorKind::domain, "ERP image samples must be finite and in [0,1]");
    }
  }
}

inline int wrap_index(int i, int n) noexcept {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

// Samples at continuous pixel coordinates where integer values are pixel
// centers. Columns wrap around the longitudinal seam, rows clamp at the poles.
template <typename T>
double sample_bilinear(const Raster<T>& r, double x, double y, int c = 0) noexcept {
  const double yc = std::clamp(y, 0.0, static_cast<double>(r.height() - 1));
  const double xf = std::floor(x);
  const double yf = std::floor(yc);
  const double fx = x - xf;
  const double fy = yc - yf;
  const int x0 = wrap_index(static_cast<int>(xf), r.width());
  const int x1 = wrap_index(x0 + 1, r.width());
  const int y0 = static_cast<int>(yf);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  // lerp form keeps constant fields exact
  const double a = r(x0, y0, c), b = r(x1, y0, c);
  const double d = r(x0, y1, c), e = r(x1, y1, c);
  const double top = a + fx * (b - a);
  const double bottom = d + fx * (e - d);
  return top + fy * (bottom - top);
}

template <typename T>
double sample_nearest(const Raster<T>& r, double x, double y, int c = 0) noexcept {
  const int xi = wrap_index(static_cast<int>(std::floor(x + 0.5)), r.width());
  const int yi = std::clamp(static_cast<int>(std::floor(y + 0.5)), 0, r.height() - 1);
  return r(xi, yi, c);
}

template <typename T>
double sample(const Raster<T>& r, double x, double y, int c, Interpolation mode) noexcept {
  return mode == Interpolation::nearest ? sample_nearest(r, x, y, c)
                                        : sample_bilinear(r, x, y, c);
}

// Resizes to `dims`. Shrinking by an integer factor in both axes averages
// blocks; everything else is bilinear with pixel-center alignment.
template <typename T>
Raster<T> resample(const Raster<T>& src, ImageDims dims) {
  if (dims == src.dims()) return src;
  if (dims.width < 1 || dims.height < 1) {
    fail(ErrorKind::contract, "resample: target dimensions must be positive");
  }
  Raster<T> out(dims, src.channels());
  const bool integral_shrink = src.width() % dims.width == 0 &&
                               src.height() % dims.height == 0 &&
                               src.width() / dims.width == src.height() / dims.height;
  if (integral_shrink) {
    const int f = src.width() / dims.width;
    const double inv = 1.0 / (static_cast<double>(f) * f);
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        for (int c = 0; c < src.channels(); ++c) {
          double acc = 0.0;
          for (int dy = 0; dy < f; ++dy) {
            for (int dx = 0; dx < f; ++dx) acc += src(x * f + dx, y * f + dy, c);
          }
          out(x, y, c) = static_cast<T>(acc * inv);
        }
      }
    }
    return out;
  }
  const double sx = static_cast<double>(src.width()) / dims.width;
  const double sy = static_cast<double>(src.height()) / dims.height;
  for (int y = 0; y < dims.height; ++y) {
    const double ys = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < dims.width; ++x) {
      const double xs = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < src.channels(); ++c) {
        out(x, y, c) = static_cast<T>(sample_bilinear(src, xs, ys, c));
      }
    }
  }
  return out;
}

}  // namespace pano_roi
