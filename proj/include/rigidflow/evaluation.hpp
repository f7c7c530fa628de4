// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// KITTI-style scene-flow / depth / odometry metrics and Umeyama trajectory
// alignment. Outlier convention: a pixel is an outlier iff its error
// exceeds 3 px AND 5% of the ground-truth magnitude.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rigidflow/camera.hpp"
#include "rigidflow/lie_se3.hpp"

namespace rigidflow {

/// Camera-to-world poses ordered by frame index.
using Trajectory = std::vector<RigidTransform>;

inline constexpr double kOutlierAbsPx = 3.0;
inline constexpr double kOutlierRel = 0.05;
inline constexpr double kDepthCap = 80.0;
inline constexpr double kDepthMin = 1e-3;

struct OutlierResult {
  double percent = 0;    ///< outlier rate over valid pixels, in [0,100]
  BinaryMask outliers;   ///< 1 where outlier (0 on invalid pixels)
  long valid_count = 0;
};

/// D1-all / D2-all style disparity outlier rate.
OutlierResult disparity_outliers(const Grid<double>& pred,
                                 const Grid<double>& gt,
                                 const BinaryMask& valid,
                                 double abs_px = kOutlierAbsPx,
                                 double rel = kOutlierRel);

/// F1-all style flow outlier rate (endpoint error vs |gt|).
OutlierResult flow_outliers(const FlowField& pred, const FlowField& gt,
                            const BinaryMask& valid,
                            double abs_px = kOutlierAbsPx,
                            double rel = kOutlierRel);

/// Mean endpoint error over valid pixels of the mask.
double epe(const FlowField& pred, const FlowField& gt, const BinaryMask& mask);

/// SF-all: union of the three outlier masks, rate over valid pixels.
double sceneflow_outliers(const BinaryMask& d1_out, const BinaryMask& d2_out,
                          const BinaryMask& f1_out, const BinaryMask& valid);

struct DepthMetrics {
  double abs_rel = 0, sq_rel = 0, rmse = 0, rmse_log = 0;
  double a1 = 0, a2 = 0, a3 = 0;  ///< delta < 1.25 / 1.25^2 / 1.25^3
};

/// Standard seven depth metrics. Ground-truth pixels outside
/// (min_depth, cap) are ignored; predictions are clamped into that range.
/// median_scale multiplies predictions by median(gt)/median(pred) first.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const BinaryMask& valid, double cap = kDepthCap,
                           double min_depth = kDepthMin,
                           bool median_scale = false);

struct SceneFlowMetrics {
  double d1_all = 0, d2_all = 0, f1_all = 0, sf_all = 0;  ///< percentages
  double epe_all = 0, epe_noc = 0, epe_occ = 0;           ///< pixels
};

/// Bundles the D1/D2/F1/SF rates and EPE splits. noc, when given, splits
/// EPE into non-occluded and occluded parts.
SceneFlowMetrics evaluate_scene_flow(const Grid<double>& pred_d1,
                                     const Grid<double>& pred_d2,
                                     const FlowField& pred_flow,
                                     const Grid<double>& gt_d1,
                                     const Grid<double>& gt_d2,
                                     const FlowField& gt_flow,
                                     const BinaryMask& valid,
                                     const BinaryMask* noc = nullptr);

struct Alignment {
  double scale = 1.0;
  RigidTransform transform;  ///< gt ~ scale * R * pred + t
};

/// Closed-form least-squares similarity (rigid when with_scale is false)
/// between the position parts of two equal-length trajectories.
/// Throws NearSingular on coincident or collinear points.
Alignment umeyama_align(const Trajectory& pred, const Trajectory& gt,
                        bool with_scale);

struct OdometryMetrics {
  double t_err_percent = 0;
  double r_err_deg_per_100m = 0;
};

/// KITTI relative-pose errors: for every start frame and every requested
/// length, the end frame is the first whose ground-truth path distance
/// reaches the length; errors are normalized by the actual ground-truth
/// segment distance and averaged over all subsequences.
OdometryMetrics odometry_errors(const Trajectory& pred, const Trajectory& gt,
                                const std::vector<double>& lengths);

/// Default evaluation lengths: 100, 200, ..., 800 meters.
std::vector<double> default_odometry_lengths();

struct MetricReport {
  std::optional<SceneFlowMetrics> scene_flow;
  std::optional<DepthMetrics> depth;
  std::optional<OdometryMetrics> odometry;
};

std::string metric_report_to_json(const MetricReport& report);
std::string metric_report_table(const MetricReport& report);

}  // namespace rigidflow
