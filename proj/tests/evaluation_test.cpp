#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "pano_roi/evaluation.hpp"
#include "support/oracles.hpp"

using namespace pano_roi;

namespace {

constexpr ImageDims kToy{16, 8};

SaliencyMap random_map(ImageDims d, std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster<double> r(d);
  for (double& v : r.data()) v = u(rng) < zero_fraction ? 0.0 : u(rng);
  return SaliencyMap(r);
}

FixationSet random_fixations(ImageDims d, std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> ux(0, d.width - 1), uy(0, d.height - 1);
  FixationSet f;
  while (static_cast<int>(f.size()) < count) {
    const Fixation p{ux(rng), uy(rng)};
    if (std::find(f.begin(), f.end(), p) == f.end()) f.push_back(p);
  }
  return f;
}

}  // namespace

TEST(Metrics, MatchScalarReferenceOnToys) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const SaliencyMap pred = random_map(kToy, rng);
    const SaliencyMap gt = random_map(kToy, rng, 0.3);
    const FixationSet fix = random_fixations(kToy, rng, 3 + t % 5);
    const oracle::MetricReference ref(pred, gt);
    MetricOptions opt;
    opt.seed = t;
    const MetricReport m = saliency_metrics(pred, gt, fix, opt);
    EXPECT_NEAR(m.cc, ref.cc(), 1e-9);
    EXPECT_NEAR(m.sim, ref.sim(), 1e-9);
    EXPECT_NEAR(m.kld, ref.kld(), 1e-9);
    EXPECT_NEAR(m.nss, ref.nss(fix), 1e-9);
    EXPECT_NEAR(m.auc_judd, ref.auc_judd(fix), 1e-9);
    EXPECT_FALSE(m.nss_degenerate);
  }
}

TEST(Metrics, BorjiConvergesToExpectation) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const SaliencyMap pred = random_map(kToy, rng);
    const SaliencyMap gt = random_map(kToy, rng);
    const FixationSet fix = random_fixations(kToy, rng, 40);
    const oracle::MetricReference ref(pred, gt);
    MetricOptions opt;
    opt.seed = 100 + t;
    opt.borji_splits = 2000;
    EXPECT_NEAR(saliency_metrics(pred, gt, fix, opt).auc_borji, ref.auc_borji_expected(fix, 0.1),
                1e-2);
  }
}

TEST(Metrics, SelfComparisonIdentities) {
  std::mt19937_64 rng(3);
  const ImageDims d{64, 32};
  const SaliencyMap m = random_map(d, rng, 0.2);
  // fixations at the largest values
  std::vector<std::size_t> idx(m.values.data().size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return m.values.data()[a] * row_weight(int(a) / d.width, d.height) >
           m.values.data()[b] * row_weight(int(b) / d.width, d.height);
  });
  FixationSet fix;
  for (int i = 0; i < 20; ++i) fix.push_back({int(idx[i] % d.width), int(idx[i] / d.width)});
  const MetricReport r = saliency_metrics(m, m, fix);
  EXPECT_NEAR(r.cc, 1.0, 1e-6);
  EXPECT_NEAR(r.sim, 1.0, 1e-6);
  EXPECT_NEAR(r.kld, 0.0, 1e-6);
  EXPECT_GE(r.auc_judd, 0.99);
}

TEST(Metrics, UniformPredictionIsChance) {
  std::mt19937_64 rng(4);
  Raster<double> flat(kToy);
  for (double& v : flat.data()) v = 0.7;
  const SaliencyMap gt = random_map(kToy, rng);
  const FixationSet fix = random_fixations(kToy, rng, 10);
  MetricOptions opt;
  opt.weighting = LatitudeWeighting::none;
  const MetricReport r = saliency_metrics(SaliencyMap(flat), gt, fix, opt);
  EXPECT_EQ(r.nss, 0.0);
  EXPECT_TRUE(r.nss_degenerate);
  EXPECT_NEAR(r.auc_judd, 0.5, 1e-12);
  EXPECT_NEAR(r.auc_borji, 0.5, 0.02);
  EXPECT_NEAR(r.cc, 0.0, 1e-12);
}

TEST(Metrics, KldNonNegative) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const SaliencyMap a = random_map(kToy, rng, 0.1);
    const SaliencyMap b = random_map(kToy, rng, 0.1);
    const FixationSet fix = random_fixations(kToy, rng, 2);
    EXPECT_GE(saliency_metrics(a, b, fix).kld, -1e-9);
    EXPECT_NEAR(saliency_metrics(a, a, fix).kld, 0.0, 1e-9);
  }
}

TEST(Metrics, BorjiIsSeeded) {
  std::mt19937_64 rng(6);
  const SaliencyMap a = random_map(kToy, rng);
  const FixationSet fix = random_fixations(kToy, rng, 5);
  MetricOptions opt;
  opt.seed = 9;
  EXPECT_EQ(saliency_metrics(a, a, fix, opt).auc_borji, saliency_metrics(a, a, fix, opt).auc_borji);
}

TEST(Metrics, ContractErrors) {
  std::mt19937_64 rng(7);
  const SaliencyMap a = random_map(kToy, rng);
  EXPECT_THROW(saliency_metrics(a, a, {}), Error);
  EXPECT_THROW(saliency_metrics(a, a, {{16, 0}}), Error);
  EXPECT_THROW(saliency_metrics(a, random_map({32, 16}, rng), {{1, 1}}), Error);
}

TEST(WrapDistance, SeamAndMaximalPair) {
  const ImageDims d{1024, 512};
  EXPECT_EQ(wrap_distance({10, 10, 20, 20}, {10, 10, 20, 20}, d), 0.0);
  // centers at x = 0 and x = W
  EXPECT_EQ(wrap_distance({-1, 100, 2, 2}, {1023, 100, 2, 2}, d), 0.0);
  // centers at (0, 0) and (W/2, H)
  EXPECT_EQ(wrap_distance({-1, -1, 2, 2}, {511, 511, 2, 2}, d), 1.0);
  EXPECT_NEAR(wrap_distance({0, 0, 2, 2}, {1020, 0, 2, 2}, d),
              4.0 / std::sqrt(512.0 * 512 + 512.0 * 512), 1e-15);
}

TEST(WrapDistance, PseudoMetricOnRandomTriples) {
  const ImageDims d{1024, 512};
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> ux(0, 1000), uy(0, 490), us(1, 20);
  for (int t = 0; t < 10000; ++t) {
    const RegionBox a{ux(rng), uy(rng), us(rng), us(rng)};
    const RegionBox b{ux(rng), uy(rng), us(rng), us(rng)};
    const RegionBox c{ux(rng), uy(rng), us(rng), us(rng)};
    const double ab = wrap_distance(a, b, d), bc = wrap_distance(b, c, d), ac = wrap_distance(a, c, d);
    ASSERT_EQ(ab, wrap_distance(b, a, d));
    ASSERT_LE(ac, ab + bc + 1e-12);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
    ASSERT_EQ(wrap_distance(a, a, d), 0.0);
  }
}

TEST(RoiSets, PerfectMatch) {
  const ImageDims d{1024, 512};
  const std::vector<RegionBox> s{{0, 0, 50, 50}, {300, 100, 80, 60}, {900, 400, 100, 100}};
  const RoiScores r = compare_roi_sets(s, s, d);
  EXPECT_EQ(r.eval1_l2, 0.0);
  EXPECT_EQ(r.eval2_l2, 0.0);
  EXPECT_EQ(r.eval1_iou, 1.0);
  EXPECT_EQ(r.eval2_iou, 1.0);
}

TEST(RoiSets, DuplicatedPrediction) {
  const ImageDims d{1024, 512};
  const RegionBox hit{100, 100, 60, 60};
  const std::vector<RegionBox> anno{hit, {130, 100, 60, 60}, {600, 300, 50, 50}};
  const std::vector<RegionBox> pred(3, hit);
  EXPECT_EQ(match_sets(pred, anno, MatchMetric::iou, MatchDirection::eval1, d), 1.0);
  const double other = iou(hit, anno[1]);
  EXPECT_NEAR(match_sets(pred, anno, MatchMetric::iou, MatchDirection::eval2, d),
              (1.0 + other + 0.0) / 3, 1e-15);
}

TEST(RoiSets, SingleAnnotationIsMeanOverPredictions) {
  const ImageDims d{1024, 512};
  const std::vector<RegionBox> anno{{200, 200, 40, 40}};
  const std::vector<RegionBox> pred{{180, 190, 40, 40}, {900, 10, 30, 30}, {205, 205, 30, 30}};
  double l2 = 0, io = 0;
  for (const RegionBox& p : pred) {
    l2 += wrap_distance(p, anno[0], d) / 3;
    io += iou(p, anno[0]) / 3;
  }
  EXPECT_NEAR(match_sets(pred, anno, MatchMetric::l2, MatchDirection::eval1, d), l2, 1e-15);
  EXPECT_NEAR(match_sets(pred, anno, MatchMetric::iou, MatchDirection::eval1, d), io, 1e-15);
}

TEST(RoiSets, PermutationInvariant) {
  const ImageDims d{1024, 512};
  std::vector<RegionBox> pred{{180, 190, 40, 40}, {900, 10, 30, 30}, {205, 205, 30, 30}};
  std::vector<RegionBox> anno{{200, 200, 40, 40}, {880, 20, 50, 30}};
  const RoiScores base = compare_roi_sets(pred, anno, d);
  std::reverse(pred.begin(), pred.end());
  std::reverse(anno.begin(), anno.end());
  const RoiScores r = compare_roi_sets(pred, anno, d);
  EXPECT_NEAR(r.eval1_iou, base.eval1_iou, 1e-15);
  EXPECT_NEAR(r.eval2_iou, base.eval2_iou, 1e-15);
  EXPECT_NEAR(r.eval1_l2, base.eval1_l2, 1e-15);
  EXPECT_NEAR(r.eval2_l2, base.eval2_l2, 1e-15);
}

TEST(RandomBaseline, WholeSetReproducibleAndFair) {
  CandidateSet c;
  for (int i = 0; i < 10; ++i) c.regions.push_back({i, 0, 1, 1});
  auto all = random_baseline(c, 10, 1);
  std::sort(all.begin(), all.end(), [](auto a, auto b) { return a.x < b.x; });
  EXPECT_EQ(all, c.regions);
  EXPECT_EQ(random_baseline(c, 5, 42), random_baseline(c, 5, 42));

  std::vector<int> hits(10, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto pick = random_baseline(c, 5, s);
    std::set<int> xs;
    for (const RegionBox& b : pick) xs.insert(b.x);
    ASSERT_EQ(xs.size(), 5u);
    for (int x : xs) ++hits[x];
  }
  for (int h : hits) EXPECT_NEAR(h / 10000.0, 0.5, 0.02);
  EXPECT_THROW(random_baseline(c, 11, 0), Error);
}
