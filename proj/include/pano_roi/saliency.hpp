#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pano_roi/geometry.hpp"
#include "pano_roi/raster.hpp"

namespace pano_roi {

// Non-negative scalar field on the ERP grid. `normalized` marks the
// latitude-weighted, sum-to-one form consumed by the optimizer.
struct SaliencyMap {
  Raster<double> values;
  bool normalized = false;

  SaliencyMap() = default;
  explicit SaliencyMap(Raster<double> v, bool is_normalized = false)
      : values(std::move(v)), normalized(is_normalized) {
    if (values.channels() != 1) {
      fail(ErrorKind::contract, "saliency map must have a single channel");
    }
    for (double x : values.data()) {
      if (!std::isfinite(x) || x < 0.0) {
        fail(ErrorKind::domain, "saliency values must be finite and non-negative");
      }
    }
  }

  ImageDims dims() const noexcept { return values.dims(); }
  double operator()(int x, int y) const noexcept { return values(x, y); }
};

inline double total(const SaliencyMap& m) {
  double s = 0.0;
  for (double v : m.values.data()) s += v;
  return s;
}

enum class LatitudeWeighting { cosine, none };

// Multiplies by cos(latitude) and rescales so that all values sum to one.
// The result is an L1 normalization despite the name the method usually
// goes by.
inline SaliencyMap normalize_saliency(const SaliencyMap& map,
                                      LatitudeWeighting weighting = LatitudeWeighting::cosine) {
  Raster<double> out = map.values;
  const ImageDims dims = map.dims();
  if (weighting == LatitudeWeighting::cosine) {
    for (int y = 0; y < dims.height; ++y) {
      const double w = row_weight(std::min(y, dims.height - 1 - y), dims.height);
      for (double& v : out.row(y)) v *= w;
    }
  }
  double sum = 0.0;
  for (double v : out.data()) sum += v;
  if (!(sum > 0.0)) {
    fail(ErrorKind::degenerate_input, "saliency map is zero everywhere");
  }
  for (double& v : out.data()) v /= sum;
  return SaliencyMap(std::move(out), true);
}

namespace detail {

// Separable [1 4 6 4 1]/16 blur, wrapping in x and reflecting in y.
inline Raster<double> pyramid_blur(const Raster<double>& src) {
  static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = src.width(), h = src.height();
  auto reflect = [h](int y) {
    if (h == 1) return 0;
    while (y < 0 || y >= h) y = y < 0 ? -y - 1 : 2 * h - y - 1;
    return y;
  };
  Raster<double> tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * src(wrap_index(x + i, w), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * tmp(x, reflect(y + i));
      out(x, y) = acc;
    }
  }
  return out;
}

// Blur then average 2x2 blocks. Block averaging (rather than decimation)
// keeps the pyramid mirror-symmetric under horizontal flips.
inline Raster<double> pyramid_down(const Raster<double>& src) {
  const Raster<double> b = pyramid_blur(src);
  Raster<double> out(std::max(1, src.width() / 2), std::max(1, src.height() / 2));
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(x, y) = 0.25 * (b(2 * x, 2 * y) + b(2 * x + 1, 2 * y) + b(2 * x, 2 * y + 1) +
                          b(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

// Bilinear resize aligned on pixel centers (wraps in x, clamps in y).
inline Raster<double> upsample_to(const Raster<double>& src, ImageDims dims) {
  if (src.dims() == dims) return src;
  Raster<double> out(dims);
  const double sx = static_cast<double>(src.width()) / dims.width;
  const double sy = static_cast<double>(src.height()) / dims.height;
  for (int y = 0; y < dims.height; ++y) {
    const double ys = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < dims.width; ++x) {
      out(x, y) = sample_bilinear(src, (x + 0.5) * sx - 0.5, ys);
    }
  }
  return out;
}

// Contrast below this level is filter round-off, not signal.
inline constexpr double kContrastFloor = 1e-9;

inline void peak_normalize(Raster<double>& m) {
  const auto data = m.data();
  const double peak = data.empty() ? 0.0 : *std::max_element(data.begin(), data.end());
  for (double& v : data) v = peak > kContrastFloor ? v / peak : 0.0;
}

}  // namespace detail

// Classical multi-scale center-surround contrast saliency on an intensity
// channel and two color-opponency channels (red-green, blue-yellow). For each
// center level c in `scales` and surround s = c+3, c+4 the feature map is
// |center - upsampled surround|; feature maps are accumulated per channel at
// the finest center level, peak-normalized, averaged across channels and
// scaled back to the input resolution with peak 1.
inline SaliencyMap fallback_saliency(const ErpImage& img, std::span<const int> scales) {
  if (img.channels() != 3) {
    fail(ErrorKind::domain, "fallback saliency needs an RGB image");
  }
  if (scales.empty()) {
    fail(ErrorKind::contract, "fallback saliency needs at least one pyramid level");
  }
  const int min_level = *std::min_element(scales.begin(), scales.end());
  const int max_level = *std::max_element(scales.begin(), scales.end()) + 4;
  if (min_level < 0 || max_level > 30 || img.height() < (1 << max_level)) {
    fail(ErrorKind::domain, "image height " + std::to_string(img.height()) +
                                " is below 2^" + std::to_string(max_level) +
                                " required by the pyramid levels");
  }

  const int w = img.width(), h = img.height();
  Raster<double> intensity(w, h), red_green(w, h), blue_yellow(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = img(x, y, 0), g = img(x, y, 1), b = img(x, y, 2);
      intensity(x, y) = (r + g + b) / 3.0;
      red_green(x, y) = r - g;
      blue_yellow(x, y) = b - 0.5 * (r + g);
    }
  }

  Raster<double> combined;
  for (const Raster<double>* channel : {&intensity, &red_green, &blue_yellow}) {
    std::vector<Raster<double>> pyramid{*channel};
    for (int l = 1; l <= max_level; ++l) pyramid.push_back(detail::pyramid_down(pyramid.back()));

    const ImageDims accum_dims = pyramid[min_level].dims();
    Raster<double> conspicuity(accum_dims);
    for (int c : scales) {
      for (int delta : {3, 4}) {
        const Raster<double> surround = detail::upsample_to(pyramid[c + delta], pyramid[c].dims());
        Raster<double> feature(pyramid[c].dims());
        for (std::size_t i = 0; i < feature.data().size(); ++i) {
          feature.data()[i] = std::abs(pyramid[c].data()[i] - surround.data()[i]);
        }
        const Raster<double> lifted = detail::upsample_to(feature, accum_dims);
        for (std::size_t i = 0; i < lifted.data().size(); ++i) {
          conspicuity.data()[i] += lifted.data()[i];
        }
      }
    }
    detail::peak_normalize(conspicuity);
    if (combined.empty()) {
      combined = std::move(conspicuity);
    } else {
      for (std::size_t i = 0; i < combined.data().size(); ++i) {
        combined.data()[i] += conspicuity.data()[i];
      }
    }
  }
  for (double& v : combined.data()) v /= 3.0;

  Raster<double> full = detail::upsample_to(combined, img.dims());
  detail::peak_normalize(full);
  return SaliencyMap(std::move(full));
}

inline SaliencyMap fallback_saliency(const ErpImage& img) {
  static constexpr int kDefaultScales[] = {2, 3, 4};
  return fallback_saliency(img, kDefaultScales);
}

}  // namespace pano_roi
