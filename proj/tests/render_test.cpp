#include <gtest/gtest.h>

#include <filesystem>

#include "pano_roi/render.hpp"

using namespace pano_roi;
namespace fs = std::filesystem;

namespace {

ErpImage gray_image(ImageDims d, float v) {
  ErpImage img(d, 3);
  for (float& x : img.data()) x = v;
  return img;
}

int changed_pixels(const ErpImage& a, const ErpImage& b) {
  int n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      for (int c = 0; c < a.channels(); ++c) {
        if (a(x, y, c) != b(x, y, c)) {
          ++n;
          break;
        }
      }
    }
  }
  return n;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("pano_roi_render_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Overlay, EmptyListIsIdenticalCopy) {
  const ErpImage img = gray_image({64, 32}, 0.5f);
  EXPECT_EQ(overlay_rois(img, {}), img);
}

TEST(Overlay, OnePixelBorderCount) {
  const ErpImage img = gray_image({128, 64}, 0.5f);
  const std::vector<RegionBox> rois{{10, 5, 20, 12}};
  OverlayStyle style;
  style.thickness = 1;
  EXPECT_EQ(changed_pixels(img, overlay_rois(img, rois, style)), 2 * 20 + 2 * 12 - 4);
}

TEST(Overlay, MatchesMaskOracle) {
  const ErpImage img = gray_image({128, 64}, 0.25f);
  const std::vector<RegionBox> rois{{10, 5, 20, 12}, {60, 30, 8, 8}, {0, 0, 128, 64}};
  const ErpImage out = overlay_rois(img, rois);
  Raster<unsigned char> mask(img.dims());
  for (const RegionBox& b : rois) {
    for (int y = b.y; y < b.bottom(); ++y) {
      for (int x = b.x; x < b.right(); ++x) {
        if (x < b.x + 2 || x >= b.right() - 2 || y < b.y + 2 || y >= b.bottom() - 2) mask(x, y) = 1;
      }
    }
  }
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) {
      EXPECT_EQ(out(x, y, 0) != img(x, y, 0) || out(x, y, 1) != img(x, y, 1) ||
                    out(x, y, 2) != img(x, y, 2),
                mask(x, y) == 1);
    }
  }
}

TEST(Overlay, PaletteCyclesByIndex) {
  const ErpImage img = gray_image({64, 32}, 0.5f);
  std::vector<RegionBox> rois;
  for (int i = 0; i < 9; ++i) rois.push_back({i * 6, 0, 5, 5});
  const ErpImage out = overlay_rois(img, rois);
  for (int i = 0; i < 9; ++i) {
    const Rgb& c = kRoiPalette[i % kRoiPalette.size()];
    const RegionBox& b = rois[i];
    EXPECT_EQ(out(b.x, b.y, 0), c[0]);
    EXPECT_EQ(out(b.x, b.y, 1), c[1]);
    EXPECT_EQ(out(b.x, b.y, 2), c[2]);
  }
}

TEST(Overlay, RejectsBadInput) {
  const ErpImage img = gray_image({64, 32}, 0.5f);
  const std::vector<RegionBox> outside{{60, 0, 10, 5}};
  EXPECT_THROW(overlay_rois(img, outside), Error);
  OverlayStyle style;
  style.thickness = 0;
  EXPECT_THROW(overlay_rois(img, {}, style), Error);
}

TEST(Crops, FilenamesFollowRoiOrder) {
  EXPECT_EQ(crop_filename(0), "roi_00.png");
  EXPECT_EQ(crop_filename(7), "roi_07.png");
  EXPECT_EQ(crop_filename(12), "roi_12.png");
}

TEST(Crops, ExportWritesOneFilePerRoi) {
  TempDir dir("crops");
  const ErpImage img = gray_image({256, 128}, 0.6f);
  const std::vector<RegionBox> rois{{10, 10, 40, 30}, {100, 50, 20, 20}, {200, 0, 56, 60}};
  const auto paths = export_crops(img, rois, dir.path);
  ASSERT_EQ(paths.size(), 3u);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_EQ(paths[i].filename().string(), crop_filename(i));
    ASSERT_TRUE(fs::exists(paths[i]));
    const ErpImage crop = read_image(paths[i]);
    const GnomonicDims g = gnomonic_dims(rois[i], img.dims());
    EXPECT_EQ(crop.width(), g.width);
    EXPECT_EQ(crop.height(), g.height);
    // a constant panorama gives a constant crop
    for (float v : crop.data()) EXPECT_NEAR(v, 0.6f, 1.0f / 255);
  }
}

TEST(Crops, AspectFollowsTangentPlane) {
  const ImageDims d{1024, 512};
  for (const RegionBox& b : {RegionBox{100, 100, 200, 100}, RegionBox{0, 200, 60, 150}}) {
    const GnomonicDims g = gnomonic_dims(b, d);
    EXPECT_NEAR(static_cast<double>(g.width) / g.height, g.plane_width / g.plane_height,
                2.0 / std::min(g.width, g.height));
  }
}
