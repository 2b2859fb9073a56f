#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <random>

#include "pano_roi/proposals.hpp"

using namespace pano_roi;

namespace {

ErpImage squares_image(ImageDims d, const std::vector<RegionBox>& squares) {
  ErpImage img(d, 3);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      img(x, y, 0) = 0.2f;
      img(x, y, 1) = 0.25f;
      img(x, y, 2) = 0.3f;
    }
  }
  const float colors[][3] = {{0.9f, 0.1f, 0.1f}, {0.1f, 0.85f, 0.2f}, {0.95f, 0.9f, 0.2f}};
  for (std::size_t i = 0; i < squares.size(); ++i) {
    const RegionBox& s = squares[i];
    for (int y = s.y; y < s.bottom(); ++y) {
      for (int x = s.x; x < s.right(); ++x) {
        for (int c = 0; c < 3; ++c) img(x, y, c) = colors[i % 3][c];
      }
    }
  }
  return img;
}

ErpImage noise_image(ImageDims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ErpImage img(d, 3);
  for (float& v : img.data()) v = u(rng);
  return img;
}

// Every label's pixels form one 4-connected component.
bool segments_connected(const SegmentLabelMap& seg) {
  const int w = seg.dims.width, h = seg.dims.height;
  std::vector<char> visited(seg.labels.size(), 0);
  std::vector<int> components(seg.segment_count, 0);
  for (int start = 0; start < w * h; ++start) {
    if (visited[start]) continue;
    const int label = seg.labels[start];
    ++components[label];
    std::queue<int> q;
    q.push(start);
    visited[start] = 1;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      const int x = i % w, y = i / w;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h) continue;
        const int j = n[1] * w + n[0];
        if (!visited[j] && seg.labels[j] == label) {
          visited[j] = 1;
          q.push(j);
        }
      }
    }
  }
  return std::all_of(components.begin(), components.end(), [](int c) { return c == 1; });
}

}  // namespace

TEST(Segmentation, TwoHalfPlanesGiveTwoSegments) {
  ErpImage img(64, 32, 3);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) img(x, y, c) = x < 32 ? 0.1f : 0.9f;
    }
  }
  const SegmentLabelMap seg = graph_segment(img, {200.0, 10, 0.0});
  ASSERT_EQ(seg.segment_count, 2);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 64; ++x) EXPECT_EQ(seg(x, y), x < 32 ? 0 : 1);
  }
}

TEST(Segmentation, LabelsContiguousConnectedAndLargeEnough) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ErpImage img = noise_image({96, 48}, seed);
    const SegmentationParams p{300.0, 20, 0.8};
    const SegmentLabelMap seg = graph_segment(img, p);
    std::vector<int> sizes(seg.segment_count, 0);
    int next = 0;
    for (int l : seg.labels) {
      ASSERT_GE(l, 0);
      ASSERT_LT(l, seg.segment_count);
      // raster order of first appearance
      if (sizes[l] == 0) {
        EXPECT_EQ(l, next++);
      }
      ++sizes[l];
    }
    for (int s : sizes) EXPECT_GE(s, p.min_size);
    EXPECT_TRUE(segments_connected(seg));
  }
}

TEST(Segmentation, InvalidParametersAreContractErrors) {
  const ErpImage img(16, 8, 3);
  EXPECT_THROW(graph_segment(img, {0.0, 10, 0.8}), Error);
  EXPECT_THROW(graph_segment(img, {100.0, 0, 0.8}), Error);
}

TEST(Hsv, MatchesHandComputedValues) {
  auto near = [](std::array<double, 3> a, std::array<double, 3> b) {
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  };
  near(detail::rgb_to_hsv(1, 0, 0), {0.0, 1.0, 1.0});
  near(detail::rgb_to_hsv(0, 1, 0), {1.0 / 3, 1.0, 1.0});
  near(detail::rgb_to_hsv(0, 0, 1), {2.0 / 3, 1.0, 1.0});
  near(detail::rgb_to_hsv(1, 0, 1), {5.0 / 6, 1.0, 1.0});
  near(detail::rgb_to_hsv(0.5, 0.5, 0.5), {0.0, 0.0, 0.5});
  near(detail::rgb_to_hsv(0.0, 0.0, 0.0), {0.0, 0.0, 0.0});
}

TEST(SelectiveSearch, FindsEachOfThreeDisjointSquares) {
  const ImageDims d{256, 128};
  const std::vector<RegionBox> squares{{20, 20, 30, 30}, {110, 60, 40, 40}, {190, 30, 24, 24}};
  const ErpImage img = squares_image(d, squares);
  const SegmentLabelMap seg = graph_segment(img, {200.0, 20, 0.8});
  const SelectiveSearchResult r = selective_search(img, seg);
  for (const RegionBox& s : squares) {
    double best = 0.0;
    for (const RegionBox& c : r.candidates.regions) best = std::max(best, iou(s, c));
    EXPECT_GE(best, 0.8) << "square at " << s.x << "," << s.y;
  }
}

TEST(SelectiveSearch, HierarchyInvariants) {
  const ErpImage img = noise_image({64, 32}, 4);
  const SegmentLabelMap seg = graph_segment(img, {150.0, 8, 0.8});
  const SelectiveSearchResult r = selective_search(img, seg);
  ASSERT_EQ(r.merges.size(), static_cast<std::size_t>(seg.segment_count - 1));
  ASSERT_EQ(r.regions.size(), static_cast<std::size_t>(2 * seg.segment_count - 1));
  EXPECT_EQ(r.regions.back().size, 64 * 32);
  EXPECT_EQ(r.regions.back().box, (RegionBox{0, 0, 64, 32}));

  for (const RegionDescriptor& d : r.regions) {
    EXPECT_NEAR(std::accumulate(d.color.begin(), d.color.end(), 0.0), 1.0, 1e-9);
    EXPECT_NEAR(std::accumulate(d.texture.begin(), d.texture.end(), 0.0), 1.0, 1e-9);
  }
  for (const MergeStep& m : r.merges) {
    const RegionDescriptor& a = r.regions[m.left];
    const RegionDescriptor& b = r.regions[m.right];
    const RegionDescriptor& c = r.regions[m.merged];
    EXPECT_EQ(c.size, a.size + b.size);
    EXPECT_EQ(c.box, bounding_union(a.box, b.box));
    for (std::size_t i = 0; i < c.color.size(); ++i) {
      EXPECT_NEAR(c.color[i], (a.size * a.color[i] + b.size * b.color[i]) / c.size, 1e-12);
    }
    for (std::size_t i = 0; i < c.texture.size(); ++i) {
      EXPECT_NEAR(c.texture[i], (a.size * a.texture[i] + b.size * b.texture[i]) / c.size, 1e-12);
    }
    EXPECT_GE(m.similarity, 0.0);
    EXPECT_LE(m.similarity, 4.0);
  }
  // candidate boxes are unique and valid
  std::set<std::tuple<int, int, int, int>> seen;
  for (const RegionBox& b : r.candidates.regions) {
    EXPECT_TRUE(seen.insert({b.x, b.y, b.w, b.h}).second);
    EXPECT_NO_THROW(check_box(b, img.dims()));
  }
}

TEST(SelectiveSearch, Deterministic) {
  const ErpImage img = noise_image({64, 32}, 5);
  const SegmentLabelMap seg = graph_segment(img, {150.0, 8, 0.8});
  EXPECT_EQ(selective_search(img, seg).candidates.regions,
            selective_search(img, seg).candidates.regions);
}

TEST(Similarity, ComponentsMatchDefinitions) {
  RegionDescriptor a, b;
  a.size = 10;
  a.box = {0, 0, 5, 2};
  a.color = {0.5, 0.5, 0.0};
  a.texture = {1.0, 0.0};
  b.size = 6;
  b.box = {5, 0, 3, 2};
  b.color = {0.0, 0.5, 0.5};
  b.texture = {0.25, 0.75};
  const Similarity s = similarity(a, b, 100);
  EXPECT_DOUBLE_EQ(s.color, 0.5);
  EXPECT_DOUBLE_EQ(s.texture, 0.25);
  EXPECT_DOUBLE_EQ(s.size, 1.0 - 16.0 / 100);
  EXPECT_DOUBLE_EQ(s.fill, 1.0 - (16.0 - 16.0) / 100);
  EXPECT_DOUBLE_EQ(s.total(), s.color + s.texture + s.size + s.fill);
}

TEST(FovFilter, MatchesPredicateExhaustively) {
  const ImageDims d{720, 360};
  CandidateSet all;
  for (int w = 1; w <= d.width; ++w) {
    for (int h = 1; h <= d.height; ++h) all.regions.push_back({0, 0, w, h});
  }
  const CandidateSet kept = fov_filter(all, d, 65.0);
  std::size_t k = 0;
  for (const RegionBox& b : all.regions) {
    // degrees per pixel is exactly 0.5 on this grid
    const bool expected = b.w <= 130 && b.h <= 130;
    EXPECT_EQ(within_nfov(b, d, 65.0), expected);
    if (expected) {
      ASSERT_LT(k, kept.size());
      EXPECT_EQ(kept.regions[k++], b);
    }
  }
  EXPECT_EQ(k, kept.size());
  EXPECT_EQ(kept.size(), 130u * 130u);
}

TEST(FovFilter, KeepsScoresAligned) {
  CandidateSet c;
  c.regions = {{0, 0, 10, 10}, {0, 0, 500, 10}, {0, 0, 20, 20}};
  c.scores = {0.1, 0.2, 0.3};
  const CandidateSet f = fov_filter(c, {1024, 512});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.scores, (std::vector<double>{0.1, 0.3}));
}

TEST(Integral, BoxSumsMatchBruteForce) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster<double> r(40, 20);
  for (double& v : r.data()) v = u(rng);
  const SaliencyMap s = normalize_saliency(SaliencyMap(r));
  const SaliencyIntegral integral(s);
  EXPECT_NEAR(integral.sum({0, 0, 40, 20}), 1.0, 1e-12);
  std::uniform_int_distribution<int> ux(0, 39), uy(0, 19);
  for (int t = 0; t < 500; ++t) {
    const int x = ux(rng), y = uy(rng);
    const RegionBox b{x, y, 1 + ux(rng) % (40 - x), 1 + uy(rng) % (20 - y)};
    double brute = 0.0;
    for (int yy = b.y; yy < b.bottom(); ++yy) {
      for (int xx = b.x; xx < b.right(); ++xx) brute += s(xx, yy);
    }
    EXPECT_NEAR(region_saliency(b, integral), brute, 1e-12);
  }
}

TEST(Integral, RequiresNormalizedMap) {
  try {
    SaliencyIntegral integral{SaliencyMap(Raster<double>(8, 4))};
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contract);
  }
}

TEST(Propose, AllCandidatesWithinNfov) {
  const ImageDims d{256, 128};
  const ErpImage img = squares_image(d, {{20, 20, 30, 30}, {110, 60, 40, 40}});
  ProposalParams p;
  p.segmentation = {200.0, 20, 0.8};
  const CandidateSet c = propose(img, p);
  ASSERT_GT(c.size(), 0u);
  for (const RegionBox& b : c.regions) EXPECT_TRUE(within_nfov(b, d, 65.0));
}

TEST(Segmentation, ConstantImageIsOneSegment) {
  ErpImage img(64, 32, 3);
  for (float& v : img.data()) v = 0.5f;
  const SegmentLabelMap seg = graph_segment(img, {});
  EXPECT_EQ(seg.segment_count, 1);
  const SelectiveSearchResult r = selective_search(img, seg);
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.candidates.regions[0], (RegionBox{0, 0, 64, 32}));
  EXPECT_TRUE(r.merges.empty());
}

TEST(Similarity, SymmetricAndBounded) {
  const ErpImage img = noise_image({64, 32}, 6);
  const SegmentLabelMap seg = graph_segment(img, {150.0, 8, 0.8});
  const std::vector<RegionDescriptor> d = detail::initial_descriptors(img, seg);
  for (std::size_t i = 0; i < d.size(); ++i) {
    // only disjoint regions are ever compared
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      const Similarity s = similarity(d[i], d[j], 64 * 32);
      EXPECT_EQ(s.total(), similarity(d[j], d[i], 64 * 32).total());
      for (double v : {s.color, s.texture, s.size}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0 + 1e-12);
      }
      EXPECT_LE(s.fill, 1.0);
      EXPECT_GE(s.fill, 0.0);
    }
  }
}

TEST(FovFilter, BoundaryFullImageAndIdempotence) {
  const ImageDims d{720, 360};
  CandidateSet c;
  c.regions = {{0, 0, 720, 360}, {10, 10, 130, 5}, {10, 10, 131, 5}, {0, 0, 5, 131}};
  const CandidateSet f = fov_filter(c, d);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.regions[0], (RegionBox{10, 10, 130, 5}));
  EXPECT_EQ(fov_filter(f, d).regions, f.regions);
}

TEST(FovFilter, RandomSetsMatchPredicate) {
  std::mt19937_64 rng(12);
  const ImageDims d{1024, 512};
  std::uniform_int_distribution<int> uw(1, 1024), uh(1, 512);
  CandidateSet c;
  for (int i = 0; i < 5000; ++i) {
    const int w = uw(rng), h = uh(rng);
    c.regions.push_back({0, 0, w, h});
  }
  const CandidateSet f = fov_filter(c, d);
  std::vector<RegionBox> expected;
  for (const RegionBox& b : c.regions) {
    if (b.w / 1024.0 * 360.0 <= 65.0 + 1e-9 && b.h / 512.0 * 180.0 <= 65.0 + 1e-9) expected.push_back(b);
  }
  EXPECT_EQ(f.regions, expected);
}

TEST(Integral, FullDisjointAndAdditive) {
  Raster<double> r(40, 20);
  for (int y = 5; y < 10; ++y) {
    for (int x = 10; x < 20; ++x) r(x, y) = 1.0 + x * 0.1;
  }
  const SaliencyMap s = normalize_saliency(SaliencyMap(r));
  const SaliencyIntegral integral(s);
  EXPECT_NEAR(integral.sum({0, 0, 40, 20}), 1.0, 1e-12);
  EXPECT_EQ(integral.sum({25, 0, 10, 20}), 0.0);
  const double top = integral.sum({8, 2, 9, 5});
  const double bottom = integral.sum({8, 7, 9, 6});
  EXPECT_NEAR(top + bottom, integral.sum({8, 2, 9, 11}), 1e-9);
}

TEST(Iou, HandValues) {
  EXPECT_EQ(iou({3, 4, 5, 6}, {3, 4, 5, 6}), 1.0);
  EXPECT_EQ(iou({0, 0, 4, 4}, {4, 0, 4, 4}), 0.0);
  EXPECT_NEAR(iou({0, 0, 4, 4}, {2, 2, 4, 4}), 4.0 / 28.0, 1e-15);
}
