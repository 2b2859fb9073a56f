#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pano_roi/box.hpp"
#include "pano_roi/geometry.hpp"
#include "pano_roi/io.hpp"
#include "pano_roi/raster.hpp"

namespace pano_roi {

using Rgb = std::array<float, 3>;

inline constexpr std::array<Rgb, 8> kRoiPalette = {{
    {0.0f, 1.0f, 0.0f},
    {1.0f, 0.0f, 0.0f},
    {0.0f, 0.5f, 1.0f},
    {1.0f, 1.0f, 0.0f},
    {1.0f, 0.0f, 1.0f},
    {0.0f, 1.0f, 1.0f},
    {1.0f, 0.5f, 0.0f},
    {1.0f, 1.0f, 1.0f},
}};

struct OverlayStyle {
  int thickness = 2;
  std::span<const Rgb> palette = kRoiPalette;  // cycled by RoI index
};

// Burns rectangle outlines (drawn inward from the box edge) into a copy of
// `img`. Single-channel images get the palette color's luminance.
inline ErpImage overlay_rois(const ErpImage& img, std::span<const RegionBox> rois,
                             const OverlayStyle& style = {}) {
  ErpImage out = img;
  if (style.palette.empty() || style.thickness < 1) {
    fail(ErrorKind::contract, "overlay_rois: empty palette or non-positive thickness");
  }
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const RegionBox& b = rois[i];
    check_box(b, img.dims());
    const Rgb& color = style.palette[i % style.palette.size()];
    const int t = style.thickness;
    for (int y = b.y; y < b.bottom(); ++y) {
      for (int x = b.x; x < b.right(); ++x) {
        const bool border = x < b.x + t || x >= b.right() - t || y < b.y + t || y >= b.bottom() - t;
        if (!border) continue;
        if (out.channels() == 3) {
          for (int c = 0; c < 3; ++c) out(x, y, c) = color[c];
        } else {
          out(x, y) = 0.299f * color[0] + 0.587f * color[1] + 0.114f * color[2];
        }
      }
    }
  }
  return out;
}

inline std::string crop_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "roi_%02zu.png", index);
  return buf;
}

// Writes one perspective crop per RoI, named by RoI order, sized by
// gnomonic_dims at the source angular resolution.
inline std::vector<fs::path> export_crops(const ErpImage& img, std::span<const RegionBox> rois,
                                          const fs::path& out_dir) {
  std::vector<ErpImage> crops;
  crops.reserve(rois.size());
  for (const RegionBox& b : rois) crops.push_back(gnomonic_project(img, b));
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < crops.size(); ++i) {
    paths.push_back(out_dir / crop_filename(i));
    write_image(paths.back(), crops[i]);
  }
  return paths;
}

}  // namespace pano_roi
