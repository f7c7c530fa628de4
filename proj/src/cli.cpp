// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rigidflow/config.hpp"
#include "rigidflow/evaluation.hpp"
#include "rigidflow/kitti_io.hpp"
#include "rigidflow/losses.hpp"
#include "rigidflow/refine.hpp"
#include "rigidflow/synthetic.hpp"
#include "rigidflow/visualize.hpp"

namespace rigidflow {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string resolve(const fs::path& base_dir, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (base_dir / p).string();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  out << text;
  if (!out) throw InvalidInput("failed writing " + path);
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(),
                     static_cast<std::int64_t>(e.byte));
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ParseError("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

DepthMap depth_from_pfm(const std::string& path) {
  Grid<double> g = read_pfm_gray(path);
  DepthMap d(g.height(), g.width());
  d.values = std::move(g);
  for (int y = 0; y < d.values.height(); ++y) {
    for (int x = 0; x < d.values.width(); ++x) {
      d.valid(y, x) =
          (is_finite(d.values(y, x)) && d.values(y, x) > 0) ? 1 : 0;
    }
  }
  return d;
}

// ---------------------------------------------------------------- gen-scene

int run_gen_scene(const std::string& spec_path, const std::string& outdir) {
  const SceneSpec spec = scene_spec_from_json(read_text_file(spec_path));
  const GroundTruth gt = render(spec);
  fs::create_directories(outdir);
  const fs::path dir(outdir);

  write_text_file((dir / "scene.json").string(), scene_spec_to_json(spec));

  write_pfm((dir / "i1.pfm").string(), gt.i1);
  write_pfm((dir / "i2.pfm").string(), gt.i2);
  write_pfm((dir / "i2_full.pfm").string(), gt.i2_full);
  write_pfm((dir / "d1.pfm").string(), gt.d1.values);
  write_pfm((dir / "d2.pfm").string(), gt.d2.values);
  write_pfm((dir / "d2_full.pfm").string(), gt.d2_full.values);
  if (gt.has_stereo) write_pfm((dir / "right.pfm").string(), gt.right);

  write_flow_png((dir / "gt_flow.png").string(), gt.f12);
  write_flow_png((dir / "gt_flow_bwd.png").string(), gt.f21);
  write_mask_png((dir / "m_noc.png").string(), gt.occlusion);
  write_mask_png((dir / "rigidity.png").string(), gt.rigidity);

  if (gt.has_stereo) {
    // Disparity of frame 1, and of frame-1 pixels at their frame-2 depth.
    const int h = gt.d1.values.height();
    const int w = gt.d1.values.width();
    Grid<double> disp1(h, w, 0.0);
    Grid<double> disp2(h, w, 0.0);
    BinaryMask v1(h, w, 0);
    BinaryMask v2(h, w, 0);
    const SceneFlowUVD uvd =
        synthesize_scene_flow(gt.d1, gt.field, gt.camera);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (gt.d1.valid(y, x) && gt.d1.values(y, x) > 0) {
          disp1(y, x) = gt.camera.fx * gt.camera.baseline / gt.d1.values(y, x);
          v1(y, x) = 1;
        }
        if (uvd.valid(y, x)) {
          const double d2 = gt.d1.values(y, x) + uvd.delta_d(y, x);
          if (d2 > 0) {
            disp2(y, x) = gt.camera.fx * gt.camera.baseline / d2;
            v2(y, x) = 1;
          }
        }
      }
    }
    write_disparity_png((dir / "gt_disp1.png").string(), disp1, v1);
    write_disparity_png((dir / "gt_disp2.png").string(), disp2, v2);
  }

  // Two-frame trajectory: world = frame-1 camera, second pose is the
  // camera's motion, the inverse of the point transform.
  write_pose_file((dir / "gt_poses.txt").string(),
                  {RigidTransform::identity(), inverse(gt.t_ego)});

  write_intrinsics((dir / "intrinsics.txt").string(), gt.camera);
  write_intrinsics((dir / "intrinsics_full.txt").string(), gt.camera_full);

  // Ground-truth estimate files, directly usable by compute-loss/refine.
  SoftMask gt_mask(gt.rigidity.height(), gt.rigidity.width(), 0.0);
  for (int y = 0; y < gt_mask.height(); ++y) {
    for (int x = 0; x < gt_mask.width(); ++x) {
      gt_mask(y, x) = gt.rigidity(y, x) ? 1.0 : 0.0;
    }
  }
  write_estimate_files(outdir, "gt_estimate", gt.field, gt_mask);

  json manifest;
  manifest["i1"] = "i1.pfm";
  manifest["i2"] = "i2.pfm";
  manifest["i2_full"] = "i2_full.pfm";
  manifest["d1"] = "d1.pfm";
  manifest["d2"] = "d2.pfm";
  manifest["d2_full"] = "d2_full.pfm";
  manifest["intrinsics"] = "intrinsics.txt";
  manifest["window"] = {{"x0", gt.window.x0},
                        {"y0", gt.window.y0},
                        {"width", gt.window.width},
                        {"height", gt.window.height}};
  if (gt.has_stereo) manifest["right"] = "right.pfm";
  write_text_file((dir / "frame.json").string(), manifest.dump(2) + "\n");
  return 0;
}

// -------------------------------------------------------------- compute-loss

int run_compute_loss(const std::string& frame_path,
                     const std::vector<std::string>& estimate_paths,
                     const std::string& config_path,
                     const std::string& m_noc_path,
                     const std::string& m_ol_path,
                     const std::string& out_path) {
  const RunConfig cfg = load_run_config(config_path);
  const SceneFrame frame = load_frame_manifest(frame_path);

  std::vector<MotionEstimate> estimates;
  estimates.reserve(estimate_paths.size());
  for (const std::string& p : estimate_paths) {
    auto [field, mask] = load_estimate_manifest(p);
    estimates.push_back(
        MotionEstimate::compute(std::move(field), std::move(mask), frame));
  }

  LossMasks masks;
  masks.p_lo = cfg.outlier_p_lo;
  masks.p_hi = cfg.outlier_p_hi;
  masks.m_noc = m_noc_path.empty()
                    ? BinaryMask(frame.height(), frame.width(), 1)
                    : read_mask_png(m_noc_path);
  if (!m_ol_path.empty()) masks.m_ol = read_mask_png(m_ol_path);

  const LossBreakdown breakdown =
      loss_total(frame, estimates, masks, cfg.weights);

  json j;
  j["total"] = breakdown.total;
  j["l_d"] = breakdown.l_d;
  j["iterations"] = json::array();
  for (const IterationLosses& it : breakdown.iterations) {
    j["iterations"].push_back({{"weight", it.weight},
                               {"l_p", it.l_p},
                               {"l_p_ego", it.l_p_ego},
                               {"l_g", it.l_g},
                               {"l_s", it.l_s},
                               {"l_c", it.l_c},
                               {"l_m", it.l_m}});
  }
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

// -------------------------------------------------------------------- refine

int run_refine(const std::string& frame_path, const std::string& config_path,
               const std::string& init_path, int block,
               const std::string& m_noc_path, const std::string& m_ol_path,
               const std::string& outdir) {
  const RunConfig cfg = load_run_config(config_path);
  const SceneFrame frame = load_frame_manifest(frame_path);

  BlockParams init;
  if (init_path.empty()) {
    init = BlockParams::init(frame.height(), frame.width(), block);
  } else {
    auto [field, mask] = load_estimate_manifest(init_path);
    require_same_shape(field.transforms.height(), field.transforms.width(),
                       frame.height(), frame.width(), "init vs frame");
    init = block_params_from_field(field, mask, block);
  }

  LossMasks masks;
  masks.p_lo = cfg.outlier_p_lo;
  masks.p_hi = cfg.outlier_p_hi;
  masks.m_noc = m_noc_path.empty()
                    ? BinaryMask(frame.height(), frame.width(), 1)
                    : read_mask_png(m_noc_path);
  if (!m_ol_path.empty()) masks.m_ol = read_mask_png(m_ol_path);

  const RefineResult result =
      refine(frame, init, masks, cfg.weights, cfg.optimizer);

  fs::create_directories(outdir);
  const fs::path dir(outdir);
  write_estimate_files(outdir, "estimate", result.estimate.field,
                       result.estimate.mask);
  write_text_file((dir / "loss.csv").string(), history_to_csv(result.history));

  const Eigen::Matrix<double, 6, 1> ego =
      result.estimate.ego_stats.mean_twist.vector();
  json summary;
  summary["status"] = result.status == RefineStatus::kStationary
                          ? "stationary"
                          : "step_budget";
  summary["accepted_steps"] = result.accepted_steps;
  summary["final_total"] = result.history.back().total;
  summary["depth_log_scale"] = result.params.depth_log_scale;
  summary["ego_twist"] = std::vector<double>(ego.data(), ego.data() + 6);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------ evaluate

BinaryMask and_masks(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a.height(), a.width(), b.height(), b.width(),
                     "validity masks");
  BinaryMask out(a.height(), a.width(), 0);
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      out(y, x) = (a(y, x) && b(y, x)) ? 1 : 0;
    }
  }
  return out;
}

int run_evaluate(const std::string& task, const json& files,
                 const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
  const RunConfig cfg = load_run_config(config_path);
  MetricReport report;
  json extra;

  if (task == "sceneflow") {
    const DisparityGrid pd1 = read_disparity_png(files.at("pred_disp1"));
    const DisparityGrid pd2 = read_disparity_png(files.at("pred_disp2"));
    const FlowField pf = read_flow_png(files.at("pred_flow"));
    const DisparityGrid gd1 = read_disparity_png(files.at("gt_disp1"));
    const DisparityGrid gd2 = read_disparity_png(files.at("gt_disp2"));
    const FlowField gf = read_flow_png(files.at("gt_flow"));
    BinaryMask valid = and_masks(and_masks(gd1.valid, gd2.valid), gf.valid);
    std::optional<BinaryMask> noc;
    if (files.contains("noc")) {
      noc = read_mask_png(files.at("noc"));
    }
    report.scene_flow = evaluate_scene_flow(
        pd1.values, pd2.values, pf, gd1.values, gd2.values, gf, valid,
        noc ? &*noc : nullptr);
  } else if (task == "depth") {
    const DepthMap pred = depth_from_pfm(files.at("pred"));
    const DepthMap gt = depth_from_pfm(files.at("gt"));
    report.depth =
        depth_metrics(pred, gt, gt.valid, cfg.eval.depth_cap,
                      cfg.eval.depth_min, cfg.eval.median_scaling);
  } else if (task == "odometry") {
    Trajectory pred = read_pose_file(files.at("pred"));
    const Trajectory gt = read_pose_file(files.at("gt"));
    const std::string align =
        files.contains("align") ? files.at("align").get<std::string>()
                                : "none";
    if (align != "none") {
      const Alignment a = umeyama_align(pred, gt, align == "similarity");
      for (RigidTransform& p : pred) {
        p = RigidTransform(a.transform.rotation() * p.rotation(),
                           a.scale * (a.transform.rotation_matrix() *
                                      p.translation()) +
                               a.transform.translation());
      }
      extra["alignment"] = {{"scale", a.scale}, {"mode", align}};
    }
    report.odometry = odometry_errors(pred, gt, cfg.eval.odometry_lengths);
  } else {
    throw InvalidInput("unknown task \"" + task + "\"");
  }

  std::string text;
  if (format == "table") {
    text = metric_report_table(report);
  } else {
    json j = json::parse(metric_report_to_json(report));
    for (const auto& item : extra.items()) j[item.key()] = item.value();
    text = j.dump(2) + "\n";
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

// ----------------------------------------------------------------- visualize

int run_visualize(const std::string& input, const std::string& kind,
                  const std::string& out_path, double max_flow,
                  double threshold) {
  Image rendered;
  if (kind == "flow") {
    const FlowField flow = read_flow_png(input);
    std::optional<double> max;
    if (max_flow > 0) max = max_flow;
    rendered = visualize_flow(flow, max);
  } else if (kind == "depth") {
    rendered = visualize_depth(depth_from_pfm(input));
  } else if (kind == "mask") {
    if (fs::path(input).extension() == ".pfm") {
      rendered = visualize_mask(read_pfm_gray(input));
    } else {
      const BinaryMask m = read_mask_png(input);
      Grid<double> soft(m.height(), m.width(), 0.0);
      for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) soft(y, x) = m(y, x) ? 1.0 : 0.0;
      }
      rendered = visualize_mask(soft);
    }
  } else if (kind == "error") {
    const Grid<double> err = read_pfm_gray(input);
    BinaryMask valid(err.height(), err.width(), 1);
    rendered = visualize_error(err, valid, threshold);
  } else {
    throw InvalidInput("unknown kind \"" + kind + "\"");
  }
  write_color_png(out_path, rendered);
  return 0;
}

}  // namespace

SceneFrame load_frame_manifest(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw ParseError(path + ": manifest must be an object");
  check_keys(j,
             {"i1", "i2", "i2_full", "d1", "d2", "d2_full", "right",
              "intrinsics", "window"},
             path);
  const fs::path base = fs::path(path).parent_path();
  auto need = [&](const char* key) -> std::string {
    if (!j.contains(key)) {
      throw ParseError(path + ": missing key \"" + key + "\"");
    }
    return resolve(base, j.at(key).get<std::string>());
  };

  SceneFrame frame;
  frame.i1 = read_pfm_color(need("i1"));
  frame.i2 = read_pfm_color(need("i2"));
  frame.d1 = depth_from_pfm(need("d1"));
  frame.d2 = depth_from_pfm(need("d2"));
  frame.camera = read_intrinsics(need("intrinsics"));
  if (j.contains("i2_full")) {
    frame.i2_full = read_pfm_color(resolve(base, j.at("i2_full")));
  }
  if (j.contains("d2_full")) {
    frame.d2_full = depth_from_pfm(resolve(base, j.at("d2_full")));
  }
  if (j.contains("right")) {
    frame.right = read_pfm_color(resolve(base, j.at("right")));
  }
  if (j.contains("window")) {
    const json& w = j.at("window");
    check_keys(w, {"x0", "y0", "width", "height"}, "window");
    frame.window = CropWindow{w.at("x0").get<int>(), w.at("y0").get<int>(),
                              w.at("width").get<int>(),
                              w.at("height").get<int>()};
  }
  frame.require_consistent();
  return frame;
}

std::pair<SE3Field, SoftMask> load_estimate_manifest(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw ParseError(path + ": manifest must be an object");
  check_keys(j, {"twist_v", "twist_w", "mask"}, path);
  const fs::path base = fs::path(path).parent_path();
  for (const char* key : {"twist_v", "twist_w", "mask"}) {
    if (!j.contains(key)) {
      throw ParseError(path + ": missing key \"" + key + "\"");
    }
  }
  const Image tv = read_pfm_color(resolve(base, j.at("twist_v")));
  const Image tw = read_pfm_color(resolve(base, j.at("twist_w")));
  const Grid<double> m = read_pfm_gray(resolve(base, j.at("mask")));
  require_same_shape(tv.height(), tv.width(), tw.height(), tw.width(),
                     "twist_v vs twist_w");
  require_same_shape(tv.height(), tv.width(), m.height(), m.width(),
                     "twists vs mask");

  SE3Field field(tv.height(), tv.width());
  SoftMask mask(tv.height(), tv.width(), 0.0);
  for (int y = 0; y < tv.height(); ++y) {
    for (int x = 0; x < tv.width(); ++x) {
      const Twist xi{tv(y, x), tw(y, x)};
      if (!xi.all_finite()) {
        field.valid(y, x) = 0;
        continue;
      }
      field.transforms(y, x) = exp(xi);
      const double mv = m(y, x);
      if (!(mv >= 0.0) || !(mv <= 1.0)) {
        throw InvalidInput(path + ": mask values must lie in [0,1]");
      }
      mask(y, x) = mv;
    }
  }
  return {std::move(field), std::move(mask)};
}

std::string write_estimate_files(const std::string& dir,
                                 const std::string& prefix,
                                 const SE3Field& field, const SoftMask& mask) {
  const fs::path base(dir);
  const TwistGrid logs = field_log(field);
  const int h = field.transforms.height();
  const int w = field.transforms.width();
  Image tv(h, w, Eigen::Vector3d::Zero());
  Image tw(h, w, Eigen::Vector3d::Zero());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!logs.valid(y, x)) continue;
      tv(y, x) = logs.twists(y, x).v;
      tw(y, x) = logs.twists(y, x).w;
    }
  }
  write_pfm((base / (prefix + "_twist_v.pfm")).string(), tv);
  write_pfm((base / (prefix + "_twist_w.pfm")).string(), tw);
  write_pfm((base / (prefix + "_mask.pfm")).string(), mask);

  json j;
  j["twist_v"] = prefix + "_twist_v.pfm";
  j["twist_w"] = prefix + "_twist_w.pfm";
  j["mask"] = prefix + "_mask.pfm";
  const std::string manifest = (base / (prefix + ".json")).string();
  write_text_file(manifest, j.dump(2) + "\n");
  return manifest;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Rigid scene-flow toolkit: synthetic scenes, losses, "
               "refinement, metrics, visualization"};
  app.require_subcommand(1);
  app.footer("Environment: EMRMSF_THREADS caps worker threads.");

  auto* gen = app.add_subcommand(
      "gen-scene", "Render a synthetic scene spec to ground-truth files");
  std::string gen_spec, gen_outdir;
  gen->add_option("spec", gen_spec, "scene spec JSON")->required();
  gen->add_option("outdir", gen_outdir, "output directory")->required();

  auto* loss = app.add_subcommand(
      "compute-loss", "Evaluate the total loss for one or more estimates");
  std::string loss_frame, loss_config, loss_m_noc, loss_m_ol, loss_out;
  std::vector<std::string> loss_estimates;
  loss->add_option("--frame", loss_frame, "frame manifest JSON")->required();
  loss->add_option("--estimate", loss_estimates,
                   "estimate manifest JSON, repeatable; last is weighted "
                   "highest")
      ->required();
  loss->add_option("--config", loss_config, "run config JSON");
  loss->add_option("--m-noc", loss_m_noc, "non-occlusion mask PNG");
  loss->add_option("--m-ol", loss_m_ol,
                   "fixed inlier mask PNG (default: recomputed per "
                   "estimate)");
  loss->add_option("--out", loss_out, "output JSON path (default stdout)");

  auto* ref = app.add_subcommand(
      "refine", "Optimize a blockwise motion field against the loss");
  std::string ref_frame, ref_config, ref_init, ref_m_noc, ref_m_ol, ref_out;
  int ref_block = 8;
  ref->add_option("--frame", ref_frame, "frame manifest JSON")->required();
  ref->add_option("--config", ref_config, "run config JSON");
  ref->add_option("--init", ref_init,
                  "estimate manifest to initialize from (default: zero "
                  "motion, mask 0.5)");
  ref->add_option("--block", ref_block, "block size in pixels")
      ->check(CLI::PositiveNumber);
  ref->add_option("--m-noc", ref_m_noc, "non-occlusion mask PNG");
  ref->add_option("--m-ol", ref_m_ol,
                  "fixed inlier mask PNG (default: computed at the initial "
                  "point)");
  ref->add_option("--out-dir", ref_out, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Compute metrics for a task");
  std::string ev_task, ev_config, ev_out, ev_format = "json";
  std::string ev_pred_disp1, ev_pred_disp2, ev_pred_flow;
  std::string ev_gt_disp1, ev_gt_disp2, ev_gt_flow, ev_noc;
  std::string ev_pred, ev_gt, ev_align = "none";
  ev->add_option("--task", ev_task, "sceneflow | depth | odometry")
      ->required()
      ->check(CLI::IsMember({"sceneflow", "depth", "odometry"}));
  ev->add_option("--config", ev_config, "run config JSON");
  ev->add_option("--out", ev_out, "output path (default stdout)");
  ev->add_option("--format", ev_format, "json | table")
      ->check(CLI::IsMember({"json", "table"}));
  ev->add_option("--pred-disp1", ev_pred_disp1, "predicted disparity 1 PNG");
  ev->add_option("--pred-disp2", ev_pred_disp2, "predicted disparity 2 PNG");
  ev->add_option("--pred-flow", ev_pred_flow, "predicted flow PNG");
  ev->add_option("--gt-disp1", ev_gt_disp1, "ground-truth disparity 1 PNG");
  ev->add_option("--gt-disp2", ev_gt_disp2, "ground-truth disparity 2 PNG");
  ev->add_option("--gt-flow", ev_gt_flow, "ground-truth flow PNG");
  ev->add_option("--noc", ev_noc, "non-occluded mask PNG (EPE split)");
  ev->add_option("--pred", ev_pred, "prediction (depth PFM / pose file)");
  ev->add_option("--gt", ev_gt, "ground truth (depth PFM / pose file)");
  ev->add_option("--align", ev_align,
                 "odometry pre-alignment: none | rigid | similarity")
      ->check(CLI::IsMember({"none", "rigid", "similarity"}));

  auto* vis = app.add_subcommand("visualize", "Render a file to a PNG");
  std::string vis_input, vis_kind, vis_out;
  double vis_max_flow = 0.0, vis_threshold = 3.0;
  vis->add_option("input", vis_input, "input file")->required();
  vis->add_option("kind", vis_kind, "flow | depth | mask | error")
      ->required()
      ->check(CLI::IsMember({"flow", "depth", "mask", "error"}));
  vis->add_option("output", vis_out, "output PNG path")->required();
  vis->add_option("--max-flow", vis_max_flow,
                  "flow magnitude mapped to full saturation (default: auto)");
  vis->add_option("--threshold", vis_threshold,
                  "error value above which pixels render solid red");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen_scene(gen_spec, gen_outdir);
    if (loss->parsed()) {
      return run_compute_loss(loss_frame, loss_estimates, loss_config,
                              loss_m_noc, loss_m_ol, loss_out);
    }
    if (ref->parsed()) {
      return run_refine(ref_frame, ref_config, ref_init, ref_block, ref_m_noc,
                        ref_m_ol, ref_out);
    }
    if (ev->parsed()) {
      json files;
      auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) files[key] = v;
      };
      put("pred_disp1", ev_pred_disp1);
      put("pred_disp2", ev_pred_disp2);
      put("pred_flow", ev_pred_flow);
      put("gt_disp1", ev_gt_disp1);
      put("gt_disp2", ev_gt_disp2);
      put("gt_flow", ev_gt_flow);
      put("noc", ev_noc);
      put("pred", ev_pred);
      put("gt", ev_gt);
      files["align"] = ev_align;
      return run_evaluate(ev_task, files, ev_config, ev_out, ev_format);
    }
    if (vis->parsed()) {
      return run_visualize(vis_input, vis_kind, vis_out, vis_max_flow,
                           vis_threshold);
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NearSingular& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const EmptySupport& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace rigidflow
