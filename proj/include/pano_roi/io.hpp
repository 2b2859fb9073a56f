#pragma once

// Raster file I/O. Color images go through OpenCV's codecs; saliency maps
// additionally support a raw little-endian float32 format with an 8-byte
// header (u32 width, u32 height).

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pano_roi/raster.hpp"
#include "pano_roi/saliency.hpp"

namespace pano_roi {

namespace fs = std::filesystem;

namespace detail {

inline std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline bool is_raw_float(const fs::path& p) {
  const std::string ext = lower_extension(p);
  return ext == ".f32" || ext == ".raw" || ext == ".bin";
}

inline double depth_scale(int depth) {
  switch (depth) {
    case CV_8U: return 1.0 / 255.0;
    case CV_16U: return 1.0 / 65535.0;
    case CV_32F:
    case CV_64F: return 1.0;
    default: fail(ErrorKind::io, "unsupported image bit depth");
  }
}

inline cv::Mat read_mat(const fs::path& path, int flags) {
  if (!fs::exists(path)) fail(ErrorKind::io, "no such file: " + path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) fail(ErrorKind::io, "cannot decode image: " + path.string());
  return m;
}

inline std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorKind::io, "truncated raw header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

// Reads an 8/16-bit (or float) image as RGB with samples in [0,1]. Grayscale
// files stay single-channel unless `force_rgb` is set.
inline ErpImage read_image(const fs::path& path, bool force_rgb = true) {
  const cv::Mat m = detail::read_mat(path, force_rgb ? cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH
                                                     : cv::IMREAD_ANYCOLOR | cv::IMREAD_ANYDEPTH);
  const double scale = detail::depth_scale(m.depth());
  cv::Mat f;
  m.convertTo(f, CV_32F, scale);
  const int nc = f.channels();
  if (nc != 1 && nc != 3) fail(ErrorKind::io, "unsupported channel count in " + path.string());
  ErpImage img(f.cols, f.rows, nc);
  for (int y = 0; y < f.rows; ++y) {
    const float* src = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      for (int c = 0; c < nc; ++c) {
        // OpenCV stores BGR
        const float v = src[x * nc + (nc == 3 ? 2 - c : 0)];
        img(x, y, c) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return img;
}

// Writes an 8-bit image; the format follows the file extension.
template <typename T>
void write_image(const fs::path& path, const Raster<T>& img) {
  const int nc = img.channels();
  if (nc != 1 && nc != 3) fail(ErrorKind::io, "can only write 1 or 3 channel images");
  cv::Mat m(img.height(), img.width(), nc == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    auto* dst = m.ptr<unsigned char>(y);
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < nc; ++c) {
        const double v = std::clamp(static_cast<double>(img(x, y, c)), 0.0, 1.0);
        dst[x * nc + (nc == 3 ? 2 - c : 0)] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) fail(ErrorKind::io, "cannot write " + path.string());
}

inline Raster<double> read_raw_float(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  const std::uint32_t w = detail::read_u32_le(in);
  const std::uint32_t h = detail::read_u32_le(in);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
    fail(ErrorKind::io, "implausible raw raster size in " + path.string());
  }
  Raster<double> r(static_cast<int>(w), static_cast<int>(h));
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 4);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    fail(ErrorKind::io, "truncated raw raster " + path.string());
  }
  for (std::size_t i = 0; i < r.data().size(); ++i) {
    const std::uint32_t bits = buf[4 * i] | (buf[4 * i + 1] << 8) | (buf[4 * i + 2] << 16) |
                               (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    r.data()[i] = std::bit_cast<float>(bits);
  }
  return r;
}

inline void write_raw_float(const fs::path& path, const Raster<double>& r) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  detail::write_u32_le(out, static_cast<std::uint32_t>(r.width()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(r.height()));
  for (double v : r.data()) detail::write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

// Reads a saliency map at its stored resolution: 8/16-bit grayscale
// PNG/PGM scaled to [0,1], or raw float32 taken verbatim.
inline SaliencyMap read_saliency(const fs::path& path) {
  Raster<double> values;
  if (detail::is_raw_float(path)) {
    if (!fs::exists(path)) fail(ErrorKind::io, "no such file: " + path.string());
    values = read_raw_float(path);
  } else {
    const cv::Mat m = detail::read_mat(path, cv::IMREAD_GRAYSCALE | cv::IMREAD_ANYDEPTH);
    cv::Mat f;
    m.convertTo(f, CV_64F, detail::depth_scale(m.depth()));
    values = Raster<double>(f.cols, f.rows);
    for (int y = 0; y < f.rows; ++y) {
      const double* src = f.ptr<double>(y);
      std::copy(src, src + f.cols, values.row(y).begin());
    }
  }
  for (double v : values.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorKind::domain, "saliency map " + path.string() + " has negative or non-finite values");
    }
  }
  return SaliencyMap(std::move(values));
}

// Loads an external saliency map for an image of size `dims`. A map of
// another resolution but the same aspect ratio is bilinearly resampled with a
// warning on `warn`; other shapes are rejected.
inline SaliencyMap load_saliency(const fs::path& path, ImageDims dims,
                                 std::ostream* warn = &std::cerr) {
  Raster<double> values = read_saliency(path).values;
  if (values.dims() != dims) {
    const bool same_aspect = static_cast<long long>(values.width()) * dims.height ==
                             static_cast<long long>(values.height()) * dims.width;
    if (!same_aspect) {
      fail(ErrorKind::domain, "saliency map " + path.string() + " is " +
                                  std::to_string(values.width()) + "x" +
                                  std::to_string(values.height()) + ", cannot resample to " +
                                  std::to_string(dims.width) + "x" + std::to_string(dims.height));
    }
    if (warn) {
      *warn << "warning: resampling saliency map " << path.string() << " from "
            << values.width() << "x" << values.height() << " to " << dims.width << "x"
            << dims.height << "\n";
    }
    values = resample(values, dims);
    for (double& v : values.data()) v = std::max(v, 0.0);
  }
  return SaliencyMap(std::move(values));
}

// Raw float32 keeps values verbatim; image formats store 8 bits scaled by
// 255 (values above 1 saturate), or 16 bits for .png/.pgm when `sixteen_bit`.
inline void save_saliency(const fs::path& path, const SaliencyMap& map, bool sixteen_bit = false) {
  if (detail::is_raw_float(path)) {
    write_raw_float(path, map.values);
    return;
  }
  const double full = sixteen_bit ? 65535.0 : 255.0;
  cv::Mat m(map.dims().height, map.dims().width, sixteen_bit ? CV_16UC1 : CV_8UC1);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const long v = std::lround(std::clamp(map(x, y), 0.0, 1.0) * full);
      if (sixteen_bit) {
        m.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(v);
      } else {
        m.at<unsigned char>(y, x) = static_cast<unsigned char>(v);
      }
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) fail(ErrorKind::io, "cannot write " + path.string());
}

}  // namespace pano_roi
