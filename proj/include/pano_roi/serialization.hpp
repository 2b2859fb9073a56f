#pragma once

// JSON documents exchanged by the command line tools. Every document carries
// a "schema" tag; readers also accept the bare-array forms for regions and
// fixations.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pano_roi/augmentation.hpp"
#include "pano_roi/box.hpp"
#include "pano_roi/evaluation.hpp"
#include "pano_roi/optimizer.hpp"
#include "pano_roi/proposals.hpp"

namespace pano_roi {

using json = nlohmann::json;

inline constexpr const char* kRegionsSchema = "pano-roi/regions/1";
inline constexpr const char* kRoisSchema = "pano-roi/rois/1";
inline constexpr const char* kAnnotationSchema = "pano-roi/annotation/1";
inline constexpr const char* kAugmentSchema = "pano-roi/augment-record/1";
inline constexpr const char* kReportSchema = "pano-roi/eval-report/1";

inline void to_json(json& j, const RegionBox& b) {
  j = json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

inline void from_json(const json& j, RegionBox& b) {
  b.x = j.at("x").get<int>();
  b.y = j.at("y").get<int>();
  b.w = j.at("w").get<int>();
  b.h = j.at("h").get<int>();
}

inline json dims_json(ImageDims d) { return {{"width", d.width}, {"height", d.height}}; }

inline std::string to_string(SwapPolicy p) {
  return p == SwapPolicy::best_improvement ? "best" : "first";
}

inline SwapPolicy parse_swap_policy(const std::string& s) {
  if (s == "first") return SwapPolicy::first_improvement;
  if (s == "best") return SwapPolicy::best_improvement;
  fail(ErrorKind::contract, "unknown swap policy '" + s + "' (expected first|best)");
}

inline std::string to_string(Interpolation i) {
  return i == Interpolation::nearest ? "nearest" : "bilinear";
}

inline Interpolation parse_interpolation(const std::string& s) {
  if (s == "bilinear") return Interpolation::bilinear;
  if (s == "nearest") return Interpolation::nearest;
  fail(ErrorKind::contract, "unknown interpolation '" + s + "'");
}

inline json regions_json(const CandidateSet& c, ImageDims dims) {
  json regions = json::array();
  for (std::size_t i = 0; i < c.regions.size(); ++i) {
    json r = c.regions[i];
    if (c.has_scores()) r["saliency"] = c.scores[i];
    regions.push_back(std::move(r));
  }
  return {{"schema", kRegionsSchema}, {"image", dims_json(dims)}, {"regions", std::move(regions)}};
}

inline CandidateSet candidates_from_json(const json& j) {
  const json& arr = j.is_array() ? j : j.at("regions");
  CandidateSet c;
  bool all_scored = !arr.empty();
  for (const json& r : arr) {
    c.regions.push_back(r.get<RegionBox>());
    if (r.contains("saliency")) {
      c.scores.push_back(r.at("saliency").get<double>());
    } else {
      all_scored = false;
    }
  }
  if (!all_scored) c.scores.clear();
  return c;
}

inline json selection_json(const RoiSelection& s, ImageDims dims, bool with_trace) {
  json regions = json::array();
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    json r = s.regions[i];
    r["g"] = s.g[i];
    regions.push_back(std::move(r));
  }
  json j{{"schema", kRoisSchema},
         {"image", dims_json(dims)},
         {"params",
          {{"n", s.params.n},
           {"a", s.params.a},
           {"epsilon", s.params.epsilon},
           {"policy", to_string(s.params.policy)}}},
         {"gamma", s.gamma},
         {"initial_gamma", s.initial_gamma},
         {"regions", std::move(regions)}};
  if (with_trace) {
    json trace = json::array();
    for (const SwapRecord& t : s.trace) {
      trace.push_back({{"candidate", t.candidate},
                       {"slot", t.slot},
                       {"gamma_before", t.gamma_before},
                       {"gamma_after", t.gamma_after}});
    }
    j["trace"] = std::move(trace);
  }
  return j;
}

// Regions of a rois, regions or annotation document (or a bare array).
inline std::vector<RegionBox> boxes_from_json(const json& j) {
  const json& arr = j.is_array() ? j : j.at("regions");
  std::vector<RegionBox> out;
  for (const json& r : arr) out.push_back(r.get<RegionBox>());
  return out;
}

inline std::optional<ImageDims> dims_from_json(const json& j) {
  if (!j.is_object() || !j.contains("image")) return std::nullopt;
  return ImageDims{j["image"].at("width").get<int>(), j["image"].at("height").get<int>()};
}

inline FixationSet fixations_from_json(const json& j) {
  const json& arr = j.is_array() ? j : j.at("fixations");
  FixationSet out;
  for (const json& p : arr) {
    if (p.is_array()) {
      out.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    } else {
      out.push_back({p.at("x").get<int>(), p.at("y").get<int>()});
    }
  }
  return out;
}

inline json augmentation_json(const AugmentationRecord& r) {
  return {{"schema", kAugmentSchema},
          {"source_id", r.source_id},
          {"theta", r.angles.theta},
          {"phi", r.angles.phi},
          {"psi", r.angles.psi},
          {"seed", r.seed},
          {"interpolation", to_string(r.interpolation)}};
}

inline AugmentationRecord augmentation_from_json(const json& j) {
  AugmentationRecord r;
  r.source_id = j.at("source_id").get<std::string>();
  r.angles = {j.at("theta").get<double>(), j.at("phi").get<double>(), j.at("psi").get<double>()};
  r.seed = j.at("seed").get<std::uint64_t>();
  r.interpolation = parse_interpolation(j.value("interpolation", std::string("bilinear")));
  return r;
}

inline json metrics_json(const MetricReport& m) {
  return {{"auc_judd", m.auc_judd}, {"auc_borji", m.auc_borji}, {"nss", m.nss},
          {"cc", m.cc},             {"sim", m.sim},             {"kld", m.kld},
          {"nss_degenerate", m.nss_degenerate}};
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::io, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

}  // namespace pano_roi
