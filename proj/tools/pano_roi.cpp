// pano_roi: command line front end.
//
//   augment   spherical random-rotation augmentation of image/saliency pairs
//   propose   selective-search candidates filtered to the normal field of view
//   select    greedy Salient-IoU selection of n RoIs
//   render    RoI overlay and perspective crops
//   eval      RoI-set and saliency-map evaluation
//   pipeline  saliency -> proposals -> selection -> render, with a manifest

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pano_roi/pano_roi.hpp"

namespace fs = std::filesystem;
using namespace pano_roi;

namespace {

enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kIo = 3,
  kContract = 4,
  kDomain = 5,
  kDegenerate = 6,
  kInsufficient = 7,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kIo;
    case ErrorKind::contract: return kContract;
    case ErrorKind::domain: return kDomain;
    case ErrorKind::degenerate_input: return kDegenerate;
    case ErrorKind::insufficient_candidates: return kInsufficient;
  }
  return kUnexpected;
}

// Options shared by every subcommand that runs part of the pipeline. Flags
// left unset fall back to the config file, then to built-in defaults.
struct PipelineFlags {
  std::optional<std::string> config;
  std::optional<std::string> image;
  std::optional<std::string> saliency;
  std::optional<std::string> regions;
  std::optional<int> n;
  std::optional<double> a;
  std::optional<std::string> policy;
  std::optional<double> nfov;
  std::optional<double> k;
  std::optional<int> min_size;
  std::optional<double> sigma;
  std::optional<int> working_width;
  std::optional<std::uint64_t> seed;

  void add_common(CLI::App* app) {
    app->add_option("--config", config, "JSON config file or run manifest");
    app->add_option("--working-width", working_width,
                    "Width of the working grid for proposals and selection (0 = native)");
    app->add_option("--k", k, "Graph segmentation scale parameter");
    app->add_option("--min-size", min_size, "Minimum segment size at 1024x512");
    app->add_option("--sigma", sigma, "Pre-smoothing standard deviation");
    app->add_option("--nfov", nfov, "Normal field of view limit in degrees");
  }
  void add_selection(CLI::App* app) {
    app->add_option("--n", n, "Number of RoIs");
    app->add_option("--a", a, "Balancing weight of the saliency term, in [0,1]");
    app->add_option("--policy", policy, "Swap acceptance: first|best");
    app->add_option("--seed", seed, "Master seed recorded in the manifest");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (config) apply_config_json(c, read_json(*config));
    if (image) c.image = *image;
    if (saliency) c.saliency = *saliency;
    if (regions) c.regions = *regions;
    if (n) c.n = *n;
    if (a) c.a = *a;
    if (policy) c.policy = parse_swap_policy(*policy);
    if (nfov) c.nfov_deg = *nfov;
    if (k) c.segmentation.k = *k;
    if (min_size) c.segmentation.min_size = *min_size;
    if (sigma) c.segmentation.sigma = *sigma;
    if (working_width) c.working_width = *working_width;
    if (seed) c.seed = *seed;
    return c;
  }
};

void require_image(const PipelineConfig& c) {
  if (c.image.empty()) fail(ErrorKind::contract, "no input image (use --image or a config file)");
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string input_dir;
  std::string output_dir;
  int count = 1;
  std::uint64_t seed = 0;
  bool horizontal_only = false;
  std::string interpolation = "bilinear";
};

bool is_image_file(const fs::path& p) {
  static const std::set<std::string> exts = {".png", ".jpg", ".jpeg", ".ppm", ".bmp", ".tif", ".tiff"};
  std::string ext = p.extension().string();
  for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return exts.count(ext) > 0;
}

std::optional<fs::path> find_saliency_for(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".f32", ".png", ".pgm"}) {
    const fs::path p = dir / (stem + "_sal" + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

int run_augment(const AugmentArgs& args) {
  if (args.count < 1) fail(ErrorKind::contract, "--count must be positive");
  const Interpolation interp = parse_interpolation(args.interpolation);
  const RotationMode mode = args.horizontal_only ? RotationMode::horizontal : RotationMode::spherical;
  if (!fs::is_directory(args.input_dir)) fail(ErrorKind::io, "not a directory: " + args.input_dir);

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(args.input_dir)) {
    const fs::path& p = entry.path();
    const std::string stem = p.stem().string();
    if (entry.is_regular_file() && is_image_file(p) &&
        !(stem.size() > 4 && stem.compare(stem.size() - 4, 4, "_sal") == 0)) {
      images.push_back(p);
    }
  }
  std::sort(images.begin(), images.end());

  fs::create_directories(args.output_dir);
  std::ofstream records(fs::path(args.output_dir) / "records.jsonl", std::ios::binary);
  if (!records) fail(ErrorKind::io, "cannot write records.jsonl");

  for (const fs::path& path : images) {
    const std::string stem = path.stem().string();
    const ErpImage img = read_image(path);
    check_erp(img);
    const std::optional<fs::path> sal_path = find_saliency_for(path.parent_path(), stem);
    const std::optional<SaliencyMap> sal =
        sal_path ? std::optional<SaliencyMap>(load_saliency(*sal_path, img.dims())) : std::nullopt;
    for (int copy = 0; copy < args.count; ++copy) {
      const std::string id = stem + "#" + std::to_string(copy);
      const AugmentationRecord rec = plan_rotation(id, args.seed, mode, interp);
      const std::string base = stem + "_rot" + std::to_string(copy);
      const fs::path out_dir(args.output_dir);
      if (sal) {
        const AugmentedPair pair = augment_pair(img, *sal, rec);
        write_image(out_dir / (base + ".png"), pair.image);
        save_saliency(out_dir / (base + "_sal.f32"), pair.saliency);
      } else {
        write_image(out_dir / (base + ".png"), rotate_erp(img, rec.angles, interp));
      }
      records << augmentation_json(rec).dump() << '\n';
    }
    std::cout << stem << ": " << args.count << " rotated cop" << (args.count == 1 ? "y" : "ies")
              << (sal ? " (with saliency)" : "") << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run_propose(const PipelineFlags& flags, const std::string& out, bool with_scores) {
  PipelineConfig c = flags.resolve();
  require_image(c);
  validate(c);
  const PreparedInputs in = with_scores ? prepare_inputs(c) : [&] {
    PreparedInputs p;
    p.original = run_stage("load", [&] {
      ErpImage img = read_image(c.image);
      check_erp(img);
      return img;
    });
    p.working = resample(p.original, working_dims(c, p.original.dims()));
    return p;
  }();
  CandidateSet cands;
  if (with_scores) {
    cands = working_candidates(c, in);
  } else {
    cands = run_stage("propose", [&] {
      const SegmentationParams seg = scaled_segmentation(c.segmentation, in.working.dims());
      return fov_filter(selective_search(in.working, graph_segment(in.working, seg)).candidates,
                        in.working.dims(), c.nfov_deg);
    });
  }
  CandidateSet mapped;
  mapped.regions = to_input_grid(cands.regions, in.working.dims(), in.original.dims());
  mapped.scores = cands.scores;
  write_json(out, regions_json(mapped, in.original.dims()));
  std::cout << mapped.size() << " candidate regions written to " << out << "\n";
  return kOk;
}

int run_select(const PipelineFlags& flags, const std::string& out, bool trace) {
  PipelineConfig c = flags.resolve();
  c.trace = c.trace || trace;
  require_image(c);
  validate(c);
  const PreparedInputs in = prepare_inputs(c);
  const CandidateSet cands = working_candidates(c, in);
  const RoiSelection sel = select_rois(c, in, cands);
  write_json(out, selection_document(c, in, sel));
  std::cout << "gamma " << sel.gamma << " (initial " << sel.initial_gamma << ", "
            << sel.trace.size() << " swaps) from " << cands.size() << " candidates\n";
  return kOk;
}

int run_render(const std::string& image, const std::string& rois_path, const std::string& out_dir,
               bool overlay, bool crops, int thickness) {
  if (!overlay && !crops) overlay = crops = true;
  const ErpImage img = read_image(image);
  check_erp(img);
  const json doc = read_json(rois_path);
  std::vector<RegionBox> rois = boxes_from_json(doc);
  if (const auto from = dims_from_json(doc)) rois = to_input_grid(rois, *from, img.dims());
  for (const RegionBox& b : rois) check_box(b, img.dims());

  std::vector<ErpImage> crop_images;
  if (crops) {
    for (const RegionBox& b : rois) crop_images.push_back(gnomonic_project(img, b));
  }
  ErpImage over;
  if (overlay) {
    OverlayStyle style;
    style.thickness = thickness;
    over = overlay_rois(img, rois, style);
  }
  const fs::path dir(out_dir);
  if (overlay) write_image(dir / "overlay.png", over);
  for (std::size_t i = 0; i < crop_images.size(); ++i) {
    write_image(dir / "crops" / crop_filename(i), crop_images[i]);
  }
  std::cout << "rendered " << rois.size() << " RoIs into " << out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string mode = "roi";
  std::string pred;
  std::vector<std::string> gt;
  std::string fixations;
  std::string out;
  std::string baseline_regions;
  int baseline_n = 5;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  int splits = 100;
};

void print_roi_table(const json& rows) {
  std::printf("%-28s %10s %10s %10s %10s\n", "pair", "Eval1 L2", "Eval2 L2", "Eval1 IoU",
              "Eval2 IoU");
  for (const json& r : rows) {
    std::printf("%-28s %10.4f %10.4f %10.4f %10.4f\n", r.at("label").get<std::string>().c_str(),
                r.at("eval1_l2").get<double>(), r.at("eval2_l2").get<double>(),
                r.at("eval1_iou").get<double>(), r.at("eval2_iou").get<double>());
  }
}

json scores_json(const RoiScores& s) {
  return {{"eval1_l2", s.eval1_l2},
          {"eval2_l2", s.eval2_l2},
          {"eval1_iou", s.eval1_iou},
          {"eval2_iou", s.eval2_iou}};
}

int run_eval(const EvalArgs& args) {
  json report{{"schema", kReportSchema}, {"mode", args.mode}};
  if (args.mode == "roi") {
    const json pred_doc = read_json(args.pred);
    const std::vector<RegionBox> pred = boxes_from_json(pred_doc);
    ImageDims dims{args.width, args.height};
    if (dims.width == 0) {
      const auto d = dims_from_json(pred_doc);
      if (!d) fail(ErrorKind::contract, "image size unknown; pass --width/--height");
      dims = *d;
    }
    std::optional<CandidateSet> pool;
    if (!args.baseline_regions.empty()) pool = candidates_from_json(read_json(args.baseline_regions));

    json rows = json::array();
    RoiScores mean_pred, mean_random;
    for (const std::string& gt_path : args.gt) {
      const json anno_doc = read_json(gt_path);
      const std::vector<RegionBox> anno = boxes_from_json(anno_doc);
      const std::string label = anno_doc.is_object()
                                    ? anno_doc.value("image_id", std::string("?")) + "/" +
                                          anno_doc.value("annotator_id", std::string("?"))
                                    : fs::path(gt_path).stem().string();
      const RoiScores s = compare_roi_sets(pred, anno, dims);
      json row = scores_json(s);
      row["label"] = label;
      row["annotation"] = gt_path;
      if (pool) {
        const std::vector<RegionBox> random =
            random_baseline(*pool, args.baseline_n, derive_seed(args.seed, gt_path));
        const RoiScores rs = compare_roi_sets(random, anno, dims);
        row["random"] = scores_json(rs);
        mean_random.eval1_l2 += rs.eval1_l2 / args.gt.size();
        mean_random.eval2_l2 += rs.eval2_l2 / args.gt.size();
        mean_random.eval1_iou += rs.eval1_iou / args.gt.size();
        mean_random.eval2_iou += rs.eval2_iou / args.gt.size();
      }
      mean_pred.eval1_l2 += s.eval1_l2 / args.gt.size();
      mean_pred.eval2_l2 += s.eval2_l2 / args.gt.size();
      mean_pred.eval1_iou += s.eval1_iou / args.gt.size();
      mean_pred.eval2_iou += s.eval2_iou / args.gt.size();
      rows.push_back(std::move(row));
    }
    report["pairs"] = rows;
    report["mean"] = scores_json(mean_pred);
    if (pool) report["random_mean"] = scores_json(mean_random);
    print_roi_table(rows);
    json mean_row = scores_json(mean_pred);
    mean_row["label"] = "mean";
    json summary = json::array({mean_row});
    if (pool) {
      json r = scores_json(mean_random);
      r["label"] = "random baseline (mean)";
      summary.push_back(r);
    }
    print_roi_table(summary);
  } else if (args.mode == "saliency") {
    if (args.gt.size() != 1) fail(ErrorKind::contract, "saliency mode takes exactly one --gt map");
    if (args.fixations.empty()) fail(ErrorKind::contract, "saliency mode needs --fixations");
    // the ground truth defines the grid; the prediction is resampled onto it
    const SaliencyMap gt_map = read_saliency(args.gt.front());
    const SaliencyMap pred = load_saliency(args.pred, gt_map.dims());
    MetricOptions opt;
    opt.seed = args.seed;
    opt.borji_splits = args.splits;
    const MetricReport m =
        saliency_metrics(pred, gt_map, fixations_from_json(read_json(args.fixations)), opt);
    report["metrics"] = metrics_json(m);
    report["borji_seed"] = args.seed;
    std::printf("%10s %10s %10s %10s %10s %10s\n", "AUC_Judd", "AUC_Borji", "NSS", "CC", "SIM",
                "KLD");
    std::printf("%10.4f %10.4f %10.4f %10.4f %10.4f %10.4f\n", m.auc_judd, m.auc_borji, m.nss, m.cc,
                m.sim, m.kld);
    if (m.nss_degenerate) std::printf("note: constant prediction, NSS reported as 0\n");
  } else {
    fail(ErrorKind::contract, "--mode must be roi or saliency");
  }
  if (!args.out.empty()) write_json(args.out, report);
  return kOk;
}

// ---------------------------------------------------------------------------

int run_pipeline_command(const PipelineFlags& flags, const std::vector<std::string>& images,
                         const std::string& out_dir, bool no_overlay, bool no_crops, bool trace) {
  PipelineConfig base = flags.resolve();
  if (!out_dir.empty()) base.output_dir = out_dir;
  if (no_overlay) base.overlay = false;
  if (no_crops) base.crops = false;
  base.trace = base.trace || trace;

  std::vector<PipelineConfig> configs;
  if (images.size() <= 1) {
    if (images.size() == 1) base.image = images.front();
    require_image(base);
    configs.push_back(base);
  } else {
    for (const std::string& img : images) {
      PipelineConfig c = base;
      c.image = img;
      c.output_dir = base.output_dir / fs::path(img).stem();
      configs.push_back(std::move(c));
    }
  }

  if (configs.size() == 1) {
    const PipelineResult r = run_pipeline(configs.front());
    std::cout << "gamma " << r.selection.gamma << "; wrote " << r.outputs.size() << " files to "
              << configs.front().output_dir.string() << "\n";
    return kOk;
  }
  int status = kOk;
  for (const BatchOutcome& o : run_batch(configs)) {
    if (o.error) {
      try {
        std::rethrow_exception(o.error);
      } catch (const Error& e) {
        std::cerr << o.image.string() << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
        if (status == kOk) status = exit_code(e.kind());
      } catch (const std::exception& e) {
        std::cerr << o.image.string() << ": " << e.what() << "\n";
        if (status == kOk) status = kUnexpected;
      }
    } else {
      std::cout << o.image.string() << ": gamma " << o.result.selection.gamma << "\n";
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detects regions of interest in 360-degree equirectangular images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Spherical random-rotation augmentation");
  augment->add_option("--input-dir", aug.input_dir,
                      "Directory of ERP images; <stem>_sal.{f32,png,pgm} pairs a saliency map")
      ->required();
  augment->add_option("--output-dir", aug.output_dir, "Destination directory")->required();
  augment->add_option("--count", aug.count, "Rotated copies per image");
  augment->add_option("--seed", aug.seed, "Master seed");
  augment->add_flag("--horizontal-only", aug.horizontal_only, "Rotate about the gravity axis only");
  augment->add_option("--interpolation", aug.interpolation, "bilinear|nearest");

  PipelineFlags propose_flags;
  std::string propose_out;
  bool propose_scores = false;
  auto* propose = app.add_subcommand("propose", "Selective-search candidates within the NFoV");
  propose->add_option("--image", propose_flags.image, "ERP image");
  propose->add_option("--out", propose_out, "Output regions JSON")->required();
  propose->add_option("--saliency", propose_flags.saliency,
                      "Score candidates with a saliency map path or 'builtin'");
  propose_flags.add_common(propose);

  PipelineFlags select_flags;
  std::string select_out;
  bool select_trace = false;
  auto* select = app.add_subcommand("select", "Greedy Salient-IoU RoI selection");
  select->add_option("--image", select_flags.image, "ERP image");
  select->add_option("--saliency", select_flags.saliency, "Saliency map path or 'builtin'");
  select->add_option("--regions", select_flags.regions, "Precomputed candidate regions JSON");
  select->add_option("--out", select_out, "Output RoI JSON")->required();
  select->add_flag("--trace", select_trace, "Record accepted swaps");
  select_flags.add_common(select);
  select_flags.add_selection(select);

  std::string render_image, render_rois, render_out;
  bool render_overlay = false, render_crops = false;
  int render_thickness = 2;
  auto* render = app.add_subcommand("render", "Overlay and perspective crops");
  render->add_option("--image", render_image, "ERP image")->required();
  render->add_option("--rois", render_rois, "RoI or regions JSON")->required();
  render->add_option("--out-dir", render_out, "Output directory")->required();
  render->add_flag("--overlay", render_overlay, "Write overlay.png");
  render->add_flag("--crops", render_crops, "Write crops/roi_XX.png");
  render->add_option("--thickness", render_thickness, "Outline thickness in pixels");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate RoI sets or saliency maps");
  eval->add_option("--mode", ev.mode, "roi|saliency")->check(CLI::IsMember({"roi", "saliency"}));
  eval->add_option("--pred", ev.pred, "Predicted rois.json or saliency map")->required();
  eval->add_option("--gt", ev.gt, "Annotation JSON (repeatable) or ground-truth map")->required();
  eval->add_option("--fixations", ev.fixations, "Fixations JSON ([[x,y],...])");
  eval->add_option("--out", ev.out, "Report JSON");
  eval->add_option("--baseline-regions", ev.baseline_regions,
                   "Candidate regions for the random-selection baseline");
  eval->add_option("--baseline-n", ev.baseline_n, "Regions per random baseline draw");
  eval->add_option("--seed", ev.seed, "Seed for random baseline and AUC_Borji sampling");
  eval->add_option("--width", ev.width, "Image width when the prediction does not record it");
  eval->add_option("--height", ev.height, "Image height when the prediction does not record it");
  eval->add_option("--splits", ev.splits, "AUC_Borji negative samplings");

  PipelineFlags pipe_flags;
  std::vector<std::string> pipe_images;
  std::string pipe_out;
  bool pipe_no_overlay = false, pipe_no_crops = false, pipe_trace = false;
  auto* pipeline = app.add_subcommand("pipeline", "Full RoI extraction for one or more images");
  pipeline->add_option("--image", pipe_images, "ERP image(s); several images run as a batch");
  pipeline->add_option("--saliency", pipe_flags.saliency, "Saliency map path or 'builtin'");
  pipeline->add_option("--regions", pipe_flags.regions, "Precomputed candidate regions JSON");
  pipeline->add_option("--out-dir", pipe_out, "Output directory");
  pipeline->add_flag("--no-overlay", pipe_no_overlay, "Skip overlay.png");
  pipeline->add_flag("--no-crops", pipe_no_crops, "Skip perspective crops");
  pipeline->add_flag("--trace", pipe_trace, "Record accepted swaps in rois.json");
  pipe_flags.add_common(pipeline);
  pipe_flags.add_selection(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*augment) return run_augment(aug);
    if (*propose) {
      propose_scores = propose_flags.saliency.has_value();
      return run_propose(propose_flags, propose_out, propose_scores);
    }
    if (*select) return run_select(select_flags, select_out, select_trace);
    if (*render) {
      return run_render(render_image, render_rois, render_out, render_overlay, render_crops,
                        render_thickness);
    }
    if (*eval) return run_eval(ev);
    if (*pipeline) {
      return run_pipeline_command(pipe_flags, pipe_images, pipe_out, pipe_no_overlay, pipe_no_crops,
                                  pipe_trace);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}
