#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pano_roi/box.hpp"
#include "pano_roi/proposals.hpp"
#include "pano_roi/saliency.hpp"

namespace pano_roi {

enum class SwapPolicy {
  first_improvement,  // accept the first slot (in index order) that lowers gamma
  best_improvement,   // try every slot, accept the lowest gamma
};

struct SIoUParams {
  int n = 5;
  double a = 0.03;         // weight of the saliency term, in [0, 1]
  double epsilon = 1e-12;  // added to g(I) before inversion
  SwapPolicy policy = SwapPolicy::first_improvement;
};

inline void check_params(const SIoUParams& p) {
  if (p.n < 1) fail(ErrorKind::contract, "n must be at least 1");
  if (!(p.a >= 0.0 && p.a <= 1.0)) fail(ErrorKind::contract, "a must lie in [0, 1]");
  if (!(p.epsilon > 0.0)) fail(ErrorKind::contract, "epsilon must be positive");
}

// Salient-IoU for n regions given their saliency masses:
//   gamma = a/n * sum_i 1/(g_i + eps) + (1-a) / C(n,2) * sum_{i<j} IoU(I_i, I_j).
// The pair term is defined as 0 for n = 1. Lower is better.
inline double salient_iou(std::span<const RegionBox> regions, std::span<const double> g,
                          const SIoUParams& p) {
  const std::size_t n = regions.size();
  if (static_cast<int>(n) != p.n || g.size() != n) {
    fail(ErrorKind::contract, "salient_iou: expected exactly n regions");
  }
  double inverse = 0.0;
  for (double gi : g) inverse += 1.0 / (gi + p.epsilon);
  double overlap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) overlap += iou(regions[i], regions[j]);
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double pair_term = pairs > 0.0 ? overlap / pairs : 0.0;
  return p.a / static_cast<double>(n) * inverse + (1.0 - p.a) * pair_term;
}

inline double salient_iou(std::span<const RegionBox> regions, const SaliencyIntegral& integral,
                          const SIoUParams& p) {
  std::vector<double> g(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) g[i] = integral.sum(regions[i]);
  return salient_iou(regions, g, p);
}

inline double salient_iou(std::span<const RegionBox> regions, const SaliencyMap& sal,
                          const SIoUParams& p) {
  return salient_iou(regions, SaliencyIntegral(sal), p);
}

struct SwapRecord {
  std::size_t candidate = 0;  // index into the candidate set
  int slot = 0;               // position in S that was replaced
  double gamma_before = 0.0;
  double gamma_after = 0.0;
};

struct RoiSelection {
  std::vector<RegionBox> regions;
  std::vector<double> g;              // saliency mass per selected region
  std::vector<std::size_t> indices;   // candidate index per selected region
  double gamma = 0.0;
  double initial_gamma = 0.0;
  SIoUParams params;
  std::vector<SwapRecord> trace;
};

// Greedy replacement:
//   1. S <- the n candidates with the largest g (ties: lower index first);
//   2. the remaining candidates are visited in decreasing g; each one in turn
//      is tried in slot 0..n-1 of S and the first strict decrease of gamma is
//      accepted (best_improvement instead picks the lowest gamma over all slots);
//   3. every visited candidate leaves R whether accepted or not, and a
//      displaced region is discarded.
inline RoiSelection greedy_select(const CandidateSet& cands, const SaliencyMap& sal,
                                  const SIoUParams& p) {
  check_params(p);
  if (!sal.normalized) {
    fail(ErrorKind::contract, "greedy_select requires a normalized saliency map");
  }
  if (cands.size() < static_cast<std::size_t>(p.n)) {
    fail(ErrorKind::insufficient_candidates,
         "need at least " + std::to_string(p.n) + " candidates, got " +
             std::to_string(cands.size()));
  }
  const SaliencyIntegral integral(sal);
  if (!(integral.sum({0, 0, sal.dims().width, sal.dims().height}) > 0.0)) {
    fail(ErrorKind::degenerate_input, "saliency map is zero everywhere");
  }
  std::vector<double> g = cands.scores;
  if (!cands.has_scores()) {
    g.resize(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) g[i] = integral.sum(cands.regions[i]);
  }

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return g[l] > g[r]; });

  RoiSelection sel;
  sel.params = p;
  sel.indices.assign(order.begin(), order.begin() + p.n);
  for (std::size_t idx : sel.indices) {
    sel.regions.push_back(cands.regions[idx]);
    sel.g.push_back(g[idx]);
  }
  sel.gamma = salient_iou(sel.regions, sel.g, p);
  sel.initial_gamma = sel.gamma;

  std::vector<RegionBox> trial_regions;
  std::vector<double> trial_g;
  for (std::size_t k = static_cast<std::size_t>(p.n); k < order.size(); ++k) {
    const std::size_t target = order[k];
    std::optional<int> accepted;
    double accepted_gamma = sel.gamma;
    for (int slot = 0; slot < p.n; ++slot) {
      trial_regions = sel.regions;
      trial_g = sel.g;
      trial_regions[slot] = cands.regions[target];
      trial_g[slot] = g[target];
      const double gamma = salient_iou(trial_regions, trial_g, p);
      if (gamma < accepted_gamma) {
        accepted = slot;
        accepted_gamma = gamma;
        if (p.policy == SwapPolicy::first_improvement) break;
      }
    }
    if (accepted) {
      sel.trace.push_back({target, *accepted, sel.gamma, accepted_gamma});
      sel.regions[*accepted] = cands.regions[target];
      sel.g[*accepted] = g[target];
      sel.indices[*accepted] = target;
      sel.gamma = accepted_gamma;
    }
  }
  return sel;
}

inline std::vector<RoiSelection> sweep_a(const CandidateSet& cands, const SaliencyMap& sal, int n,
                                         std::span<const double> a_values,
                                         SwapPolicy policy = SwapPolicy::first_improvement) {
  std::vector<RoiSelection> out;
  out.reserve(a_values.size());
  for (double a : a_values) {
    SIoUParams p;
    p.n = n;
    p.a = a;
    p.policy = policy;
    out.push_back(greedy_select(cands, sal, p));
  }
  return out;
}

// Mean IoU over all unordered pairs; 0 for fewer than two regions.
inline double mean_pairwise_iou(std::span<const RegionBox> regions) {
  const std::size_t n = regions.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += iou(regions[i], regions[j]);
  }
  return s / (0.5 * n * (n - 1));
}

}  // namespace pano_roi
