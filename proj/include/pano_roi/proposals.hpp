#pragma once

// Redundant region proposals for ERP images: efficient graph-based
// segmentation into superpixels, hierarchical grouping of adjacent segments
// by color/texture/size/fill similarity, and the normal-field-of-view filter.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "pano_roi/box.hpp"
#include "pano_roi/raster.hpp"
#include "pano_roi/saliency.hpp"

namespace pano_roi {

struct SegmentLabelMap {
  ImageDims dims;
  std::vector<int> labels;  // row-major, contiguous ids 0..segment_count-1
  int segment_count = 0;

  int operator()(int x, int y) const noexcept {
    return labels[static_cast<std::size_t>(y) * dims.width + x];
  }
};

struct SegmentationParams {
  double k = 200.0;
  int min_size = 100;
  double sigma = 0.8;
};

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian with clamped borders; sigma <= 0 copies.
inline Raster<double> gaussian_smooth(const Raster<double>& src, double sigma) {
  if (sigma <= 0.0) return src;
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = src.width(), h = src.height(), nc = src.channels();
  Raster<double> tmp(w, h, nc), out(w, h, nc);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * src(std::clamp(x + i, 0, w - 1), y, c);
        }
        tmp(x, y, c) = acc;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * tmp(x, std::clamp(y + i, 0, h - 1), c);
        }
        out(x, y, c) = acc;
      }
    }
  }
  return out;
}

template <typename T>
Raster<double> to_double(const Raster<T>& src) {
  Raster<double> out(src.dims(), src.channels());
  std::copy(src.data().begin(), src.data().end(), out.data().begin());
  return out;
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Returns the surviving root.
  int join(int a, int b) noexcept {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }
  int size(int root) const noexcept { return size_[root]; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace detail

// Graph-based segmentation on the 4-connected pixel grid. Edges are sorted by
// color distance (0..255 scale), ties by edge index; two components merge when
// the edge weight does not exceed either component's internal difference plus
// k/|component|. Components smaller than min_size are then absorbed along the
// cheapest remaining edges. Labels are numbered in raster order of first
// appearance.
inline SegmentLabelMap graph_segment(const ErpImage& img, const SegmentationParams& p) {
  if (!(p.k > 0.0) || p.min_size < 1) {
    fail(ErrorKind::contract, "graph_segment: k must be positive and min_size >= 1");
  }
  const int w = img.width(), h = img.height();
  const Raster<double> smooth = detail::gaussian_smooth(detail::to_double(img), p.sigma);
  const int nc = smooth.channels();

  struct Edge {
    float weight;
    int a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(w) * h * 2);
  auto dist = [&](int x0, int y0, int x1, int y1) {
    double s = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double d = 255.0 * (smooth(x0, y0, c) - smooth(x1, y1, c));
      s += d * d;
    }
    return static_cast<float>(std::sqrt(s));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int id = y * w + x;
      if (x + 1 < w) edges.push_back({dist(x, y, x + 1, y), id, id + 1});
      if (y + 1 < h) edges.push_back({dist(x, y, x, y + 1), id, id + w});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& l, const Edge& r) { return l.weight < r.weight; });

  detail::DisjointSets sets(w * h);
  std::vector<double> threshold(static_cast<std::size_t>(w) * h, p.k);
  for (const Edge& e : edges) {
    const int a = sets.find(e.a);
    const int b = sets.find(e.b);
    if (a != b && e.weight <= threshold[a] && e.weight <= threshold[b]) {
      const int root = sets.join(a, b);
      threshold[root] = e.weight + p.k / sets.size(root);
    }
  }
  for (const Edge& e : edges) {
    const int a = sets.find(e.a);
    const int b = sets.find(e.b);
    if (a != b && (sets.size(a) < p.min_size || sets.size(b) < p.min_size)) {
      sets.join(a, b);
    }
  }

  SegmentLabelMap out;
  out.dims = img.dims();
  out.labels.resize(static_cast<std::size_t>(w) * h);
  std::vector<int> relabel(static_cast<std::size_t>(w) * h, -1);
  for (int i = 0; i < w * h; ++i) {
    const int root = sets.find(i);
    if (relabel[root] < 0) relabel[root] = out.segment_count++;
    out.labels[i] = relabel[root];
  }
  return out;
}

struct CandidateSet {
  std::vector<RegionBox> regions;
  std::vector<double> scores;  // empty, or one saliency mass per region

  bool has_scores() const noexcept {
    return !regions.empty() && scores.size() == regions.size();
  }
  std::size_t size() const noexcept { return regions.size(); }
};

inline constexpr int kColorBins = 25;
inline constexpr int kTextureOrientations = 8;
inline constexpr int kTextureBins = 10;

struct RegionDescriptor {
  long long size = 0;
  RegionBox box;
  std::vector<double> color;    // 3 x kColorBins, sums to 1
  std::vector<double> texture;  // 3 x kTextureOrientations x kTextureBins, sums to 1
};

struct Similarity {
  double color = 0.0;
  double texture = 0.0;
  double size = 0.0;
  double fill = 0.0;

  double total() const noexcept { return color + texture + size + fill; }
};

inline double histogram_intersection(const std::vector<double>& a,
                                     const std::vector<double>& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::min(a[i], b[i]);
  return s;
}

inline Similarity similarity(const RegionDescriptor& a, const RegionDescriptor& b,
                             long long image_size) {
  const double n = static_cast<double>(image_size);
  Similarity s;
  s.color = histogram_intersection(a.color, b.color);
  s.texture = histogram_intersection(a.texture, b.texture);
  s.size = 1.0 - static_cast<double>(a.size + b.size) / n;
  s.fill = 1.0 - static_cast<double>(bounding_union(a.box, b.box).area() - a.size - b.size) / n;
  return s;
}

// Size-weighted union of two descriptors.
inline RegionDescriptor merge_descriptors(const RegionDescriptor& a, const RegionDescriptor& b) {
  RegionDescriptor m;
  m.size = a.size + b.size;
  m.box = bounding_union(a.box, b.box);
  const double sa = static_cast<double>(a.size), sb = static_cast<double>(b.size);
  const double st = static_cast<double>(m.size);
  m.color.resize(a.color.size());
  for (std::size_t i = 0; i < m.color.size(); ++i) {
    m.color[i] = (sa * a.color[i] + sb * b.color[i]) / st;
  }
  m.texture.resize(a.texture.size());
  for (std::size_t i = 0; i < m.texture.size(); ++i) {
    m.texture[i] = (sa * a.texture[i] + sb * b.texture[i]) / st;
  }
  return m;
}

namespace detail {

// RGB in [0,1] to HSV with every component in [0,1].
inline std::array<double, 3> rgb_to_hsv(double r, double g, double b) noexcept {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  double hue = 0.0;
  if (delta > 0.0) {
    if (mx == r) {
      hue = (g - b) / delta;
      if (hue < 0.0) hue += 6.0;
    } else if (mx == g) {
      hue = (b - r) / delta + 2.0;
    } else {
      hue = (r - g) / delta + 4.0;
    }
    hue /= 6.0;
  }
  return {hue, mx > 0.0 ? delta / mx : 0.0, mx};
}

inline int bin_of(double v, int bins) noexcept {
  return std::clamp(static_cast<int>(v * bins), 0, bins - 1);
}

inline std::vector<RegionDescriptor> initial_descriptors(const ErpImage& img,
                                                         const SegmentLabelMap& seg) {
  const int w = img.width(), h = img.height();
  const int m = seg.segment_count;
  const int nc = img.channels();
  std::vector<RegionDescriptor> regions(m);
  std::vector<std::array<int, 4>> extent(m, {w, h, -1, -1});  // x0 y0 x1 y1
  for (auto& r : regions) {
    r.color.assign(3 * kColorBins, 0.0);
    r.texture.assign(3 * kTextureOrientations * kTextureBins, 0.0);
  }

  // Oriented first derivatives of a sigma=1 smoothed copy, positive parts only
  // (orientation k and k+4 are the two signs of one direction).
  const Raster<double> smooth = gaussian_smooth(to_double(img), 1.0);
  std::vector<Raster<double>> responses;
  for (int c = 0; c < 3; ++c) {
    const int src_c = std::min(c, nc - 1);
    Raster<double> dx(w, h), dy(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        dx(x, y) = 0.5 * (smooth(std::min(x + 1, w - 1), y, src_c) -
                          smooth(std::max(x - 1, 0), y, src_c));
        dy(x, y) = 0.5 * (smooth(x, std::min(y + 1, h - 1), src_c) -
                          smooth(x, std::max(y - 1, 0), src_c));
      }
    }
    for (int o = 0; o < kTextureOrientations; ++o) {
      const double angle = o * kPi / 4.0;
      const double ca = std::cos(angle), sa = std::sin(angle);
      Raster<double> resp(w, h);
      double peak = 0.0;
      for (std::size_t i = 0; i < resp.data().size(); ++i) {
        const double v = std::max(0.0, ca * dx.data()[i] + sa * dy.data()[i]);
        resp.data()[i] = v;
        peak = std::max(peak, v);
      }
      if (peak > 0.0) {
        for (double& v : resp.data()) v /= peak;
      }
      responses.push_back(std::move(resp));
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = seg(x, y);
      RegionDescriptor& r = regions[l];
      ++r.size;
      auto& e = extent[l];
      e[0] = std::min(e[0], x);
      e[1] = std::min(e[1], y);
      e[2] = std::max(e[2], x);
      e[3] = std::max(e[3], y);
      const double red = img(x, y, 0);
      const double green = img(x, y, std::min(1, nc - 1));
      const double blue = img(x, y, std::min(2, nc - 1));
      const auto hsv = rgb_to_hsv(red, green, blue);
      for (int c = 0; c < 3; ++c) r.color[c * kColorBins + bin_of(hsv[c], kColorBins)] += 1.0;
      for (int t = 0; t < 3 * kTextureOrientations; ++t) {
        r.texture[t * kTextureBins + bin_of(responses[t](x, y), kTextureBins)] += 1.0;
      }
    }
  }
  for (int l = 0; l < m; ++l) {
    RegionDescriptor& r = regions[l];
    const auto& e = extent[l];
    r.box = {e[0], e[1], e[2] - e[0] + 1, e[3] - e[1] + 1};
    const double color_norm = 3.0 * static_cast<double>(r.size);
    for (double& v : r.color) v /= color_norm;
    const double texture_norm = 3.0 * kTextureOrientations * static_cast<double>(r.size);
    for (double& v : r.texture) v /= texture_norm;
  }
  return regions;
}

}  // namespace detail

struct MergeStep {
  int left = 0;
  int right = 0;
  int merged = 0;
  double similarity = 0.0;
};

struct SelectiveSearchResult {
  std::vector<RegionDescriptor> regions;  // initial segments, then one per merge
  std::vector<MergeStep> merges;
  CandidateSet candidates;                // bounding boxes of `regions`, deduplicated
};

// Hierarchical grouping: repeatedly merges the most similar pair of adjacent
// regions until one region is left. Ties go to the lexicographically smallest
// (left, right) pair.
inline SelectiveSearchResult selective_search(const ErpImage& img, const SegmentLabelMap& seg) {
  if (seg.dims != img.dims()) {
    fail(ErrorKind::contract, "selective_search: label map does not match the image");
  }
  const long long image_size = img.dims().pixel_count();
  SelectiveSearchResult result;
  result.regions = detail::initial_descriptors(img, seg);
  const int m = seg.segment_count;

  std::vector<std::set<int>> neighbours(m);
  for (int y = 0; y < seg.dims.height; ++y) {
    for (int x = 0; x < seg.dims.width; ++x) {
      const int l = seg(x, y);
      if (x + 1 < seg.dims.width && seg(x + 1, y) != l) {
        neighbours[l].insert(seg(x + 1, y));
        neighbours[seg(x + 1, y)].insert(l);
      }
      if (y + 1 < seg.dims.height && seg(x, y + 1) != l) {
        neighbours[l].insert(seg(x, y + 1));
        neighbours[seg(x, y + 1)].insert(l);
      }
    }
  }

  struct Entry {
    double sim;
    int a, b;  // a < b
  };
  auto lower_priority = [](const Entry& l, const Entry& r) {
    if (l.sim != r.sim) return l.sim < r.sim;
    return std::tie(l.a, l.b) > std::tie(r.a, r.b);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)> queue(lower_priority);
  for (int a = 0; a < m; ++a) {
    for (int b : neighbours[a]) {
      if (a < b) {
        queue.push({similarity(result.regions[a], result.regions[b], image_size).total(), a, b});
      }
    }
  }

  std::vector<bool> active(m, true);
  while (!queue.empty()) {
    const Entry top = queue.top();
    queue.pop();
    if (!active[top.a] || !active[top.b]) continue;

    const int merged = static_cast<int>(result.regions.size());
    result.regions.push_back(merge_descriptors(result.regions[top.a], result.regions[top.b]));
    result.merges.push_back({top.a, top.b, merged, top.sim});
    active[top.a] = false;
    active[top.b] = false;
    active.push_back(true);

    std::set<int> adjacent;
    for (int side : {top.a, top.b}) {
      for (int n : neighbours[side]) {
        if (n != top.a && n != top.b && active[n]) adjacent.insert(n);
      }
    }
    for (int n : adjacent) {
      neighbours[n].insert(merged);
      queue.push({similarity(result.regions[n], result.regions[merged], image_size).total(), n,
                  merged});
    }
    neighbours.push_back(std::move(adjacent));
  }

  std::set<std::tuple<int, int, int, int>> seen;
  for (const RegionDescriptor& r : result.regions) {
    if (seen.insert({r.box.x, r.box.y, r.box.w, r.box.h}).second) {
      result.candidates.regions.push_back(r.box);
    }
  }
  return result;
}

inline bool within_nfov(const RegionBox& b, ImageDims dims, double nfov_deg) noexcept {
  // cross-multiplied so integer boundary cases compare exactly
  return b.w * 360.0 <= nfov_deg * dims.width && b.h * 180.0 <= nfov_deg * dims.height;
}

// Keeps regions whose longitude and latitude field of view are both within
// `nfov_deg` degrees (inclusive).
inline CandidateSet fov_filter(const CandidateSet& cands, ImageDims dims, double nfov_deg = 65.0) {
  CandidateSet out;
  for (std::size_t i = 0; i < cands.regions.size(); ++i) {
    if (within_nfov(cands.regions[i], dims, nfov_deg)) {
      out.regions.push_back(cands.regions[i]);
      if (cands.has_scores()) out.scores.push_back(cands.scores[i]);
    }
  }
  return out;
}

// Summed-area table over a normalized saliency map for O(1) box sums.
class SaliencyIntegral {
 public:
  explicit SaliencyIntegral(const SaliencyMap& sal)
      : dims_(sal.dims()), table_(static_cast<std::size_t>(dims_.width + 1) * (dims_.height + 1)) {
    if (!sal.normalized) {
      fail(ErrorKind::contract, "region saliency requires a normalized saliency map");
    }
    const int stride = dims_.width + 1;
    for (int y = 0; y < dims_.height; ++y) {
      double row = 0.0;
      for (int x = 0; x < dims_.width; ++x) {
        row += sal(x, y);
        table_[(y + 1) * stride + x + 1] = table_[y * stride + x + 1] + row;
      }
    }
  }

  ImageDims dims() const noexcept { return dims_; }

  double sum(const RegionBox& b) const {
    check_box(b, dims_);
    const int stride = dims_.width + 1;
    const double s = table_[b.bottom() * stride + b.right()] - table_[b.y * stride + b.right()] -
                     table_[b.bottom() * stride + b.x] + table_[b.y * stride + b.x];
    return std::max(0.0, s);
  }

 private:
  ImageDims dims_;
  std::vector<double> table_;
};

// g(I): saliency mass inside the box.
inline double region_saliency(const RegionBox& box, const SaliencyIntegral& integral) {
  return integral.sum(box);
}

inline double region_saliency(const RegionBox& box, const SaliencyMap& sal) {
  return SaliencyIntegral(sal).sum(box);
}

inline void score_candidates(CandidateSet& cands, const SaliencyIntegral& integral) {
  cands.scores.resize(cands.regions.size());
  for (std::size_t i = 0; i < cands.regions.size(); ++i) {
    cands.scores[i] = integral.sum(cands.regions[i]);
  }
}

struct ProposalParams {
  SegmentationParams segmentation;
  double nfov_deg = 65.0;
};

// Segmentation, grouping and NFoV filtering in one call.
inline CandidateSet propose(const ErpImage& img, const ProposalParams& p) {
  const SegmentLabelMap seg = graph_segment(img, p.segmentation);
  return fov_filter(selective_search(img, seg).candidates, img.dims(), p.nfov_deg);
}

}  // namespace pano_roi
