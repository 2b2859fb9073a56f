#pragma once

// End-to-end RoI extraction: saliency -> normalization -> proposals ->
// NFoV filter -> greedy Salient-IoU selection -> overlay and crops.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pano_roi/io.hpp"
#include "pano_roi/optimizer.hpp"
#include "pano_roi/proposals.hpp"
#include "pano_roi/render.hpp"
#include "pano_roi/saliency.hpp"
#include "pano_roi/serialization.hpp"

namespace pano_roi {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "pano-roi/manifest/1";
inline constexpr const char* kConfigSchema = "pano-roi/config/1";

// min_size is specified for this reference resolution and scaled with the
// working area.
inline constexpr ImageDims kReferenceDims{1024, 512};

struct PipelineConfig {
  fs::path image;
  std::string saliency = "builtin";  // "builtin" or a saliency map path
  fs::path regions;                  // optional precomputed candidates
  int n = 5;
  double a = 0.03;
  double epsilon = 1e-12;
  SwapPolicy policy = SwapPolicy::first_improvement;
  double nfov_deg = 65.0;
  SegmentationParams segmentation;
  int working_width = 1024;  // 0 keeps the input resolution
  std::vector<int> saliency_scales{2, 3, 4};
  fs::path output_dir;
  bool overlay = true;
  bool crops = true;
  bool trace = false;
  std::uint64_t seed = 0;
};

inline void validate(const PipelineConfig& c) {
  SIoUParams p;
  p.n = c.n;
  p.a = c.a;
  p.epsilon = c.epsilon;
  check_params(p);
  if (!(c.nfov_deg > 0.0 && c.nfov_deg < 180.0)) {
    fail(ErrorKind::contract, "nfov_deg must lie in (0, 180)");
  }
  if (!(c.segmentation.k > 0.0) || c.segmentation.min_size < 1 || c.segmentation.sigma < 0.0) {
    fail(ErrorKind::contract, "selective search needs k > 0, min_size >= 1, sigma >= 0");
  }
  if (c.working_width < 0 || c.working_width % 2 != 0) {
    fail(ErrorKind::contract, "working_width must be even (or 0 for native resolution)");
  }
  if (c.saliency_scales.empty()) fail(ErrorKind::contract, "saliency_scales must not be empty");
}

inline json config_json(const PipelineConfig& c) {
  return {{"schema", kConfigSchema},
          {"image", c.image.string()},
          {"saliency", c.saliency},
          {"regions", c.regions.string()},
          {"n", c.n},
          {"a", c.a},
          {"epsilon", c.epsilon},
          {"policy", to_string(c.policy)},
          {"nfov_deg", c.nfov_deg},
          {"k", c.segmentation.k},
          {"min_size", c.segmentation.min_size},
          {"sigma", c.segmentation.sigma},
          {"working_width", c.working_width},
          {"saliency_scales", c.saliency_scales},
          {"output_dir", c.output_dir.string()},
          {"overlay", c.overlay},
          {"crops", c.crops},
          {"trace", c.trace},
          {"seed", c.seed}};
}

// Overlays keys present in `j` onto `c`. A run manifest is accepted as well
// (its "config" member is used).
inline void apply_config_json(PipelineConfig& c, const json& doc) {
  const json& j = doc.contains("config") ? doc.at("config") : doc;
  try {
    if (j.contains("image")) c.image = j["image"].get<std::string>();
    if (j.contains("saliency")) c.saliency = j["saliency"].get<std::string>();
    if (j.contains("regions")) c.regions = j["regions"].get<std::string>();
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("a")) c.a = j["a"].get<double>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("policy")) c.policy = parse_swap_policy(j["policy"].get<std::string>());
    if (j.contains("nfov_deg")) c.nfov_deg = j["nfov_deg"].get<double>();
    if (j.contains("k")) c.segmentation.k = j["k"].get<double>();
    if (j.contains("min_size")) c.segmentation.min_size = j["min_size"].get<int>();
    if (j.contains("sigma")) c.segmentation.sigma = j["sigma"].get<double>();
    if (j.contains("working_width")) c.working_width = j["working_width"].get<int>();
    if (j.contains("saliency_scales")) c.saliency_scales = j["saliency_scales"].get<std::vector<int>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("overlay")) c.overlay = j["overlay"].get<bool>();
    if (j.contains("crops")) c.crops = j["crops"].get<bool>();
    if (j.contains("trace")) c.trace = j["trace"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::contract, std::string("invalid configuration: ") + e.what());
  }
}

// Runs `fn`, prefixing any library error with the stage name.
template <typename F>
auto run_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::io, std::string(stage) + ": " + e.what());
  }
}

inline ImageDims working_dims(const PipelineConfig& c, ImageDims input) {
  return c.working_width == 0 ? input : ImageDims{c.working_width, c.working_width / 2};
}

inline SegmentationParams scaled_segmentation(const SegmentationParams& p, ImageDims work) {
  SegmentationParams s = p;
  const double ratio = static_cast<double>(work.pixel_count()) / kReferenceDims.pixel_count();
  s.min_size = std::max(1, static_cast<int>(std::lround(p.min_size * ratio)));
  return s;
}

struct PreparedInputs {
  ErpImage original;
  ErpImage working;
  SaliencyMap saliency;  // normalized, working resolution
};

inline PreparedInputs prepare_inputs(const PipelineConfig& c) {
  PreparedInputs in;
  in.original = run_stage("load", [&] {
    ErpImage img = read_image(c.image);
    check_erp(img);
    return img;
  });
  in.working = resample(in.original, working_dims(c, in.original.dims()));
  in.saliency = run_stage("saliency", [&] {
    const SaliencyMap raw = c.saliency == "builtin"
                                ? fallback_saliency(in.working, c.saliency_scales)
                                : load_saliency(c.saliency, in.working.dims());
    return normalize_saliency(raw);
  });
  return in;
}

// Candidates on the working grid: precomputed ones are mapped from the grid
// they were recorded on (the input image when unstated).
inline CandidateSet working_candidates(const PipelineConfig& c, const PreparedInputs& in) {
  return run_stage("propose", [&] {
    CandidateSet cands;
    if (!c.regions.empty()) {
      const json doc = read_json(c.regions);
      const CandidateSet loaded = candidates_from_json(doc);
      const ImageDims from = dims_from_json(doc).value_or(in.original.dims());
      for (const RegionBox& b : loaded.regions) {
        check_box(b, from);
        cands.regions.push_back(rescale_box(b, from, in.working.dims()));
      }
    } else {
      ProposalParams p;
      p.segmentation = scaled_segmentation(c.segmentation, in.working.dims());
      p.nfov_deg = c.nfov_deg;
      cands.regions = selective_search(in.working, graph_segment(in.working, p.segmentation))
                          .candidates.regions;
    }
    // candidates loaded from disk are filtered too; the filter is idempotent
    cands = fov_filter(cands, in.working.dims(), c.nfov_deg);
    score_candidates(cands, SaliencyIntegral(in.saliency));
    return cands;
  });
}

inline RoiSelection select_rois(const PipelineConfig& c, const PreparedInputs& in,
                                const CandidateSet& cands) {
  return run_stage("select", [&] {
    SIoUParams p;
    p.n = c.n;
    p.a = c.a;
    p.epsilon = c.epsilon;
    p.policy = c.policy;
    return greedy_select(cands, in.saliency, p);
  });
}

inline std::vector<RegionBox> to_input_grid(std::span<const RegionBox> boxes, ImageDims from,
                                            ImageDims to) {
  std::vector<RegionBox> out;
  for (const RegionBox& b : boxes) out.push_back(rescale_box(b, from, to));
  return out;
}

inline json selection_document(const PipelineConfig& c, const PreparedInputs& in,
                               const RoiSelection& sel) {
  RoiSelection mapped = sel;
  mapped.regions = to_input_grid(sel.regions, in.working.dims(), in.original.dims());
  json j = selection_json(mapped, in.original.dims(), c.trace);
  j["working_image"] = dims_json(in.working.dims());
  return j;
}

struct PipelineResult {
  RoiSelection selection;             // on the working grid
  std::vector<RegionBox> rois;        // on the input grid
  std::vector<fs::path> outputs;
};

// Every stage runs in memory before anything is written, so a failing stage
// leaves no output behind.
inline PipelineResult run_pipeline(const PipelineConfig& c) {
  run_stage("config", [&] {
    validate(c);
    if (c.output_dir.empty()) fail(ErrorKind::contract, "output directory not set");
  });
  const PreparedInputs in = prepare_inputs(c);
  const CandidateSet cands = working_candidates(c, in);

  PipelineResult result;
  result.selection = select_rois(c, in, cands);
  result.rois = to_input_grid(result.selection.regions, in.working.dims(), in.original.dims());
  const json rois_doc = selection_document(c, in, result.selection);

  std::vector<ErpImage> crops;
  ErpImage overlay;
  run_stage("render", [&] {
    if (c.overlay) overlay = overlay_rois(in.original, result.rois);
    if (c.crops) {
      for (const RegionBox& b : result.rois) crops.push_back(gnomonic_project(in.original, b));
    }
  });

  run_stage("write", [&] {
    const fs::path rois_path = c.output_dir / "rois.json";
    write_json(rois_path, rois_doc);
    result.outputs.push_back(rois_path);
    if (c.overlay) {
      result.outputs.push_back(c.output_dir / "overlay.png");
      write_image(result.outputs.back(), overlay);
    }
    for (std::size_t i = 0; i < crops.size(); ++i) {
      result.outputs.push_back(c.output_dir / "crops" / crop_filename(i));
      write_image(result.outputs.back(), crops[i]);
    }
    json outputs = json::array();
    for (const fs::path& p : result.outputs) {
      outputs.push_back(fs::relative(p, c.output_dir).generic_string());
    }
    const json manifest{{"schema", kManifestSchema},
                        {"version", kVersion},
                        {"compiler", __VERSION__},
                        {"config", config_json(c)},
                        {"seeds", {{"master", c.seed}}},
                        {"input_image", dims_json(in.original.dims())},
                        {"working_image", dims_json(in.working.dims())},
                        {"candidates", cands.size()},
                        {"outputs", std::move(outputs)}};
    const fs::path manifest_path = c.output_dir / "manifest.json";
    write_json(manifest_path, manifest);
    result.outputs.push_back(manifest_path);
  });
  return result;
}

// Worker count from PANO_ROI_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("PANO_ROI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct BatchOutcome {
  fs::path image;
  std::exception_ptr error;  // null on success
  PipelineResult result;
};

// Runs independent pipelines on a bounded pool; results keep input order.
inline std::vector<BatchOutcome> run_batch(const std::vector<PipelineConfig>& configs,
                                           unsigned threads = worker_count()) {
  std::vector<BatchOutcome> out(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      out[i].image = configs[i].image;
      try {
        out[i].result = run_pipeline(configs[i]);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return out;
}

}  // namespace pano_roi
