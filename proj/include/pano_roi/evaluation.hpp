#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pano_roi/box.hpp"
#include "pano_roi/geometry.hpp"
#include "pano_roi/proposals.hpp"
#include "pano_roi/rng.hpp"
#include "pano_roi/saliency.hpp"

namespace pano_roi {

// ---------------------------------------------------------------------------
// Saliency-map metrics
// ---------------------------------------------------------------------------

struct Fixation {
  int x = 0;
  int y = 0;
  constexpr bool operator==(const Fixation&) const = default;
};

using FixationSet = std::vector<Fixation>;

struct MetricReport {
  double auc_judd = 0.0;
  double auc_borji = 0.0;
  double nss = 0.0;
  double cc = 0.0;
  double sim = 0.0;
  double kld = 0.0;
  bool nss_degenerate = false;  // prediction had zero variance; nss reported as 0
};

struct MetricOptions {
  LatitudeWeighting weighting = LatitudeWeighting::cosine;
  int borji_splits = 100;
  double borji_step = 0.1;
  std::uint64_t seed = 0;
  double kld_epsilon = 1e-12;
};

namespace detail {

inline std::vector<double> weighted_values(const SaliencyMap& m, LatitudeWeighting weighting) {
  std::vector<double> out(m.values.data().begin(), m.values.data().end());
  if (weighting == LatitudeWeighting::cosine) {
    const ImageDims d = m.dims();
    for (int y = 0; y < d.height; ++y) {
      const double w = row_weight(std::min(y, d.height - 1 - y), d.height);
      for (int x = 0; x < d.width; ++x) out[static_cast<std::size_t>(y) * d.width + x] *= w;
    }
  }
  return out;
}

inline void to_distribution(std::vector<double>& v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(s > 0.0)) fail(ErrorKind::degenerate_input, "saliency map is zero everywhere");
  for (double& x : v) x /= s;
}

// Trapezoidal area under a polyline through (fp, tp) points.
inline double trapezoid(const std::vector<double>& fp, const std::vector<double>& tp) {
  double area = 0.0;
  for (std::size_t i = 1; i < fp.size(); ++i) {
    area += (fp[i] - fp[i - 1]) * (tp[i] + tp[i - 1]) * 0.5;
  }
  return area;
}

// Exact test; a mean-based variance can be a few ulps above zero here.
inline bool is_constant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return v.empty() || *lo == *hi;
}

}  // namespace detail

// Pearson correlation of two equally sized samples; 0 when either is constant.
inline double pearson(std::span<const double> p, std::span<const double> q) {
  const double n = static_cast<double>(p.size());
  const double mp = std::accumulate(p.begin(), p.end(), 0.0) / n;
  const double mq = std::accumulate(q.begin(), q.end(), 0.0) / n;
  double cov = 0.0, vp = 0.0, vq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cov += (p[i] - mp) * (q[i] - mq);
    vp += (p[i] - mp) * (p[i] - mp);
    vq += (q[i] - mq) * (q[i] - mq);
  }
  if (detail::is_constant(p) || detail::is_constant(q) || vp <= 0.0 || vq <= 0.0) return 0.0;
  return cov / std::sqrt(vp * vq);
}

// AUC with thresholds at the distinct saliency values of the fixations;
// negatives are all pixels without a fixation. Ties count as detections on
// both axes, so a constant map scores exactly 0.5.
inline double auc_judd(std::span<const double> sal, ImageDims dims, const FixationSet& fix) {
  std::vector<char> is_fixated(sal.size(), 0);
  std::vector<double> pos;
  pos.reserve(fix.size());
  for (const Fixation& f : fix) {
    const std::size_t i = static_cast<std::size_t>(f.y) * dims.width + f.x;
    is_fixated[i] = 1;
    pos.push_back(sal[i]);
  }
  std::vector<double> neg;
  neg.reserve(sal.size());
  for (std::size_t i = 0; i < sal.size(); ++i) {
    if (!is_fixated[i]) neg.push_back(sal[i]);
  }
  if (neg.empty()) fail(ErrorKind::contract, "auc_judd: every pixel is a fixation");
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());

  std::vector<double> fp{0.0}, tp{0.0};
  std::size_t ip = 0, in = 0;
  while (ip < pos.size()) {
    const double t = pos[ip];
    while (ip < pos.size() && pos[ip] >= t) ++ip;
    while (in < neg.size() && neg[in] >= t) ++in;
    tp.push_back(static_cast<double>(ip) / pos.size());
    fp.push_back(static_cast<double>(in) / neg.size());
  }
  tp.push_back(1.0);
  fp.push_back(1.0);
  return detail::trapezoid(fp, tp);
}

// AUC against uniformly sampled negatives (as many as fixations, with
// replacement), thresholds every `step` on the min-max rescaled map, averaged
// over `splits` seeded draws.
inline double auc_borji(std::span<const double> sal, ImageDims dims, const FixationSet& fix,
                        int splits, double step, std::uint64_t seed) {
  const auto [lo_it, hi_it] = std::minmax_element(sal.begin(), sal.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  auto rescaled = [&](std::size_t i) { return range > 0.0 ? (sal[i] - lo) / range : 0.0; };

  std::vector<double> pos;
  for (const Fixation& f : fix) pos.push_back(rescaled(static_cast<std::size_t>(f.y) * dims.width + f.x));
  Rng rng(seed);
  std::vector<double> neg(pos.size());
  double total = 0.0;
  for (int s = 0; s < splits; ++s) {
    for (double& v : neg) v = rescaled(uniform_index(rng, sal.size()));
    const double top = std::max(*std::max_element(pos.begin(), pos.end()),
                                *std::max_element(neg.begin(), neg.end()));
    std::vector<double> fp{0.0}, tp{0.0};
    const int levels = static_cast<int>(std::floor(top / step + 1e-9));
    for (int k = levels; k >= 0; --k) {
      const double t = k * step;
      const auto above = [t](const std::vector<double>& v) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [t](double x) { return x >= t; }));
      };
      tp.push_back(above(pos) / pos.size());
      fp.push_back(above(neg) / neg.size());
    }
    tp.push_back(1.0);
    fp.push_back(1.0);
    total += detail::trapezoid(fp, tp);
  }
  return total / splits;
}

// Six saliency metrics. Both maps are weighted by cos(latitude) first; CC,
// SIM and KLD compare the weighted maps as distributions, NSS z-scores the
// weighted prediction, and the two AUCs rank the weighted prediction.
inline MetricReport saliency_metrics(const SaliencyMap& pred, const SaliencyMap& gt_map,
                                     const FixationSet& gt_fix, const MetricOptions& opt = {}) {
  const ImageDims dims = pred.dims();
  if (gt_map.dims() != dims) fail(ErrorKind::contract, "prediction and ground truth differ in size");
  if (gt_fix.empty()) fail(ErrorKind::contract, "NSS and AUC need at least one fixation");
  for (const Fixation& f : gt_fix) {
    if (f.x < 0 || f.y < 0 || f.x >= dims.width || f.y >= dims.height) {
      fail(ErrorKind::contract, "fixation outside the image");
    }
  }
  std::vector<double> p = detail::weighted_values(pred, opt.weighting);
  std::vector<double> q = detail::weighted_values(gt_map, opt.weighting);
  detail::to_distribution(p);
  detail::to_distribution(q);

  MetricReport r;
  r.cc = pearson(p, q);
  for (std::size_t i = 0; i < p.size(); ++i) {
    r.sim += std::min(p[i], q[i]);
    if (q[i] > 0.0) r.kld += q[i] * std::log(q[i] / (p[i] + opt.kld_epsilon));
  }

  const double n = static_cast<double>(p.size());
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
  double var = 0.0;
  for (double v : p) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / n);
  if (!detail::is_constant(p) && stddev > 0.0) {
    double acc = 0.0;
    for (const Fixation& f : gt_fix) {
      acc += (p[static_cast<std::size_t>(f.y) * dims.width + f.x] - mean) / stddev;
    }
    r.nss = acc / static_cast<double>(gt_fix.size());
  } else {
    r.nss_degenerate = true;
  }

  r.auc_judd = auc_judd(p, dims, gt_fix);
  r.auc_borji = auc_borji(p, dims, gt_fix, opt.borji_splits, opt.borji_step, opt.seed);
  return r;
}

// ---------------------------------------------------------------------------
// RoI-set comparison
// ---------------------------------------------------------------------------

// Distance between box centers with the horizontal offset taken around the
// seam, normalized by the largest possible offset sqrt((W/2)^2 + H^2).
inline double wrap_distance(const RegionBox& alpha, const RegionBox& beta, ImageDims dims) {
  const double dx = std::abs(alpha.center_x() - beta.center_x());
  const double horizontal = std::min(dx, dims.width - dx);
  const double vertical = alpha.center_y() - beta.center_y();
  const double half_w = 0.5 * dims.width;
  return std::sqrt(horizontal * horizontal + vertical * vertical) /
         std::sqrt(half_w * half_w + static_cast<double>(dims.height) * dims.height);
}

enum class MatchMetric { l2, iou };
enum class MatchDirection {
  eval1,  // precision-like: best annotation for every prediction
  eval2,  // recall-like: best prediction for every annotation
};

inline double match_sets(std::span<const RegionBox> pred, std::span<const RegionBox> anno,
                         MatchMetric metric, MatchDirection direction, ImageDims dims) {
  if (pred.empty() || anno.empty()) fail(ErrorKind::contract, "match_sets: empty region set");
  const auto from = direction == MatchDirection::eval1 ? pred : anno;
  const auto to = direction == MatchDirection::eval1 ? anno : pred;
  double total = 0.0;
  for (const RegionBox& f : from) {
    double best = metric == MatchMetric::l2 ? std::numeric_limits<double>::infinity() : -1.0;
    for (const RegionBox& t : to) {
      if (metric == MatchMetric::l2) {
        best = std::min(best, wrap_distance(f, t, dims));
      } else {
        best = std::max(best, iou(f, t));
      }
    }
    total += best;
  }
  return total / static_cast<double>(from.size());
}

struct RoiScores {
  double eval1_l2 = 0.0;
  double eval2_l2 = 0.0;
  double eval1_iou = 0.0;
  double eval2_iou = 0.0;
};

inline RoiScores compare_roi_sets(std::span<const RegionBox> pred, std::span<const RegionBox> anno,
                                  ImageDims dims) {
  return {match_sets(pred, anno, MatchMetric::l2, MatchDirection::eval1, dims),
          match_sets(pred, anno, MatchMetric::l2, MatchDirection::eval2, dims),
          match_sets(pred, anno, MatchMetric::iou, MatchDirection::eval1, dims),
          match_sets(pred, anno, MatchMetric::iou, MatchDirection::eval2, dims)};
}

// n candidates drawn uniformly without replacement (partial Fisher-Yates).
inline std::vector<RegionBox> random_baseline(const CandidateSet& cands, int n, std::uint64_t seed) {
  if (n < 0 || cands.size() < static_cast<std::size_t>(n)) {
    fail(ErrorKind::insufficient_candidates, "random baseline needs at least n candidates");
  }
  std::vector<std::size_t> idx(cands.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::vector<RegionBox> out;
  for (int i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(cands.regions[idx[i]]);
  }
  return out;
}

}  // namespace pano_roi
