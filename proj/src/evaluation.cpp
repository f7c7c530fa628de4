// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/evaluation.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rigidflow/parallel.hpp"

namespace rigidflow {
namespace {

long count_valid(const BinaryMask& valid) {
  long n = 0;
  for (int y = 0; y < valid.height(); ++y) {
    for (int x = 0; x < valid.width(); ++x) {
      if (valid(y, x)) ++n;
    }
  }
  return n;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double m = v[n / 2];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    m = 0.5 * (m + v[n / 2 - 1]);
  }
  return m;
}

}  // namespace

OutlierResult disparity_outliers(const Grid<double>& pred,
                                 const Grid<double>& gt,
                                 const BinaryMask& valid, double abs_px,
                                 double rel) {
  const int h = gt.height();
  const int w = gt.width();
  require_same_shape(h, w, pred.height(), pred.width(), "disparity grids");
  require_same_shape(h, w, valid.height(), valid.width(), "disparity vs mask");

  OutlierResult res;
  res.outliers = BinaryMask(h, w, 0);
  long outliers = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      ++res.valid_count;
      const double err = std::abs(pred(y, x) - gt(y, x));
      if (err > abs_px && err > rel * std::abs(gt(y, x))) {
        res.outliers(y, x) = 1;
        ++outliers;
      }
    }
  }
  if (res.valid_count == 0) {
    throw InvalidInput("disparity_outliers: no valid pixels");
  }
  res.percent = 100.0 * outliers / res.valid_count;
  return res;
}

OutlierResult flow_outliers(const FlowField& pred, const FlowField& gt,
                            const BinaryMask& valid, double abs_px,
                            double rel) {
  const int h = gt.height();
  const int w = gt.width();
  require_same_shape(h, w, pred.height(), pred.width(), "flow grids");
  require_same_shape(h, w, valid.height(), valid.width(), "flow vs mask");

  OutlierResult res;
  res.outliers = BinaryMask(h, w, 0);
  long outliers = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      ++res.valid_count;
      const double err = (pred.values(y, x) - gt.values(y, x)).norm();
      if (err > abs_px && err > rel * gt.values(y, x).norm()) {
        res.outliers(y, x) = 1;
        ++outliers;
      }
    }
  }
  if (res.valid_count == 0) {
    throw InvalidInput("flow_outliers: no valid pixels");
  }
  res.percent = 100.0 * outliers / res.valid_count;
  return res;
}

double epe(const FlowField& pred, const FlowField& gt,
           const BinaryMask& mask) {
  const int h = gt.height();
  const int w = gt.width();
  require_same_shape(h, w, pred.height(), pred.width(), "flow grids");
  require_same_shape(h, w, mask.height(), mask.width(), "flow vs mask");
  KahanSum sum;
  long count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      sum.add((pred.values(y, x) - gt.values(y, x)).norm());
      ++count;
    }
  }
  return count > 0 ? sum.value() / count : 0.0;
}

double sceneflow_outliers(const BinaryMask& d1_out, const BinaryMask& d2_out,
                          const BinaryMask& f1_out, const BinaryMask& valid) {
  const int h = valid.height();
  const int w = valid.width();
  require_same_shape(h, w, d1_out.height(), d1_out.width(), "sf masks");
  require_same_shape(h, w, d2_out.height(), d2_out.width(), "sf masks");
  require_same_shape(h, w, f1_out.height(), f1_out.width(), "sf masks");
  long outliers = 0;
  long n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      ++n;
      if (d1_out(y, x) || d2_out(y, x) || f1_out(y, x)) ++outliers;
    }
  }
  if (n == 0) throw InvalidInput("sceneflow_outliers: no valid pixels");
  return 100.0 * outliers / n;
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const BinaryMask& valid, double cap,
                           double min_depth, bool median_scale) {
  const int h = gt.height();
  const int w = gt.width();
  require_same_shape(h, w, pred.height(), pred.width(), "depth grids");
  require_same_shape(h, w, valid.height(), valid.width(), "depth vs mask");

  std::vector<double> ps, gs;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x) || !gt.valid(y, x) || !pred.valid(y, x)) continue;
      const double g = gt.values(y, x);
      if (!(g > min_depth) || !(g < cap)) continue;
      ps.push_back(std::clamp(pred.values(y, x), min_depth, cap));
      gs.push_back(g);
    }
  }
  if (ps.empty()) throw InvalidInput("depth_metrics: no valid pixels");

  if (median_scale) {
    const double s = median_of(gs) / median_of(ps);
    for (double& p : ps) p = std::clamp(p * s, min_depth, cap);
  }

  KahanSum abs_rel, sq_rel, sq, sq_log;
  long n1 = 0, n2 = 0, n3 = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = ps[i];
    const double g = gs[i];
    const double d = p - g;
    abs_rel.add(std::abs(d) / g);
    sq_rel.add(d * d / g);
    sq.add(d * d);
    const double dl = std::log(p) - std::log(g);
    sq_log.add(dl * dl);
    const double delta = std::max(p / g, g / p);
    if (delta < 1.25) ++n1;
    if (delta < 1.25 * 1.25) ++n2;
    if (delta < 1.25 * 1.25 * 1.25) ++n3;
  }
  const double n = static_cast<double>(ps.size());
  DepthMetrics m;
  m.abs_rel = abs_rel.value() / n;
  m.sq_rel = sq_rel.value() / n;
  m.rmse = std::sqrt(sq.value() / n);
  m.rmse_log = std::sqrt(sq_log.value() / n);
  m.a1 = n1 / n;
  m.a2 = n2 / n;
  m.a3 = n3 / n;
  return m;
}

SceneFlowMetrics evaluate_scene_flow(const Grid<double>& pred_d1,
                                     const Grid<double>& pred_d2,
                                     const FlowField& pred_flow,
                                     const Grid<double>& gt_d1,
                                     const Grid<double>& gt_d2,
                                     const FlowField& gt_flow,
                                     const BinaryMask& valid,
                                     const BinaryMask* noc) {
  const OutlierResult d1 = disparity_outliers(pred_d1, gt_d1, valid);
  const OutlierResult d2 = disparity_outliers(pred_d2, gt_d2, valid);
  const OutlierResult f1 = flow_outliers(pred_flow, gt_flow, valid);

  SceneFlowMetrics m;
  m.d1_all = d1.percent;
  m.d2_all = d2.percent;
  m.f1_all = f1.percent;
  m.sf_all = sceneflow_outliers(d1.outliers, d2.outliers, f1.outliers, valid);
  m.epe_all = epe(pred_flow, gt_flow, valid);
  if (noc) {
    const int h = valid.height();
    const int w = valid.width();
    require_same_shape(h, w, noc->height(), noc->width(), "valid vs noc");
    BinaryMask noc_valid(h, w, 0);
    BinaryMask occ_valid(h, w, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!valid(y, x)) continue;
        ((*noc)(y, x) ? noc_valid : occ_valid)(y, x) = 1;
      }
    }
    m.epe_noc = epe(pred_flow, gt_flow, noc_valid);
    m.epe_occ = epe(pred_flow, gt_flow, occ_valid);
  } else {
    m.epe_noc = m.epe_all;
    m.epe_occ = 0.0;
  }
  return m;
}

Alignment umeyama_align(const Trajectory& pred, const Trajectory& gt,
                        bool with_scale) {
  if (pred.size() != gt.size()) {
    throw InvalidInput("umeyama_align: trajectory lengths differ");
  }
  const auto n = static_cast<long>(pred.size());
  if (n < 3) throw InvalidInput("umeyama_align: need at least 3 poses");

  Vector3 mu_x = Vector3::Zero();
  Vector3 mu_y = Vector3::Zero();
  for (long i = 0; i < n; ++i) {
    mu_x += pred[i].translation();
    mu_y += gt[i].translation();
  }
  mu_x /= n;
  mu_y /= n;

  Matrix3 sigma = Matrix3::Zero();
  double var_x = 0;
  for (long i = 0; i < n; ++i) {
    const Vector3 dx = pred[i].translation() - mu_x;
    const Vector3 dy = gt[i].translation() - mu_y;
    sigma += dy * dx.transpose();
    var_x += dx.squaredNorm();
  }
  sigma /= n;
  var_x /= n;

  Eigen::JacobiSVD<Matrix3> svd(sigma,
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3 d = svd.singularValues();
  // Rank >= 2 is required to pin down the rotation; coincident or
  // collinear point sets leave it ambiguous.
  if (!(var_x > 0) || d(1) <= 1e-12 * std::max(d(0), 1e-300)) {
    throw NearSingular("umeyama_align: degenerate point configuration");
  }

  Matrix3 s_fix = Matrix3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) {
    s_fix(2, 2) = -1.0;
  }
  const Matrix3 r = svd.matrixU() * s_fix * svd.matrixV().transpose();

  Alignment a;
  a.scale = with_scale ? (d.asDiagonal().toDenseMatrix() * s_fix).trace() / var_x
                       : 1.0;
  const Vector3 t = mu_y - a.scale * (r * mu_x);
  a.transform = RigidTransform::from_rotation_matrix(r, t);
  return a;
}

std::vector<double> default_odometry_lengths() {
  return {100, 200, 300, 400, 500, 600, 700, 800};
}

OdometryMetrics odometry_errors(const Trajectory& pred, const Trajectory& gt,
                                const std::vector<double>& lengths) {
  if (pred.size() != gt.size()) {
    throw InvalidInput("odometry_errors: trajectory lengths differ");
  }
  const auto n = static_cast<long>(gt.size());
  if (n < 2) throw InvalidInput("odometry_errors: need at least 2 poses");
  if (lengths.empty()) {
    throw InvalidInput("odometry_errors: no segment lengths given");
  }

  std::vector<double> cumdist(n, 0.0);
  for (long i = 1; i < n; ++i) {
    cumdist[i] = cumdist[i - 1] +
                 (gt[i].translation() - gt[i - 1].translation()).norm();
  }

  KahanSum t_sum, r_sum;
  long count = 0;
  for (double len : lengths) {
    if (!(len > 0)) {
      throw InvalidInput("odometry_errors: lengths must be positive");
    }
    bool any = false;
    long end = 0;
    for (long start = 0; start < n; ++start) {
      while (end < n && cumdist[end] - cumdist[start] < len) ++end;
      if (end >= n) break;
      const double seg = cumdist[end] - cumdist[start];
      const RigidTransform dg = compose(inverse(gt[start]), gt[end]);
      const RigidTransform dp = compose(inverse(pred[start]), pred[end]);
      const RigidTransform err = compose(inverse(dp), dg);
      t_sum.add(100.0 * err.translation().norm() / seg);
      r_sum.add(100.0 * err.rotation_angle() * (180.0 / M_PI) / seg);
      ++count;
      any = true;
    }
    if (!any) {
      throw InvalidInput(
          "odometry_errors: ground truth shorter than a requested length");
    }
  }

  OdometryMetrics m;
  m.t_err_percent = t_sum.value() / count;
  m.r_err_deg_per_100m = r_sum.value() / count;
  return m;
}

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::json j;
  if (report.scene_flow) {
    const SceneFlowMetrics& s = *report.scene_flow;
    j["scene_flow"] = {{"d1_all", s.d1_all},   {"d2_all", s.d2_all},
                       {"f1_all", s.f1_all},   {"sf_all", s.sf_all},
                       {"epe_all", s.epe_all}, {"epe_noc", s.epe_noc},
                       {"epe_occ", s.epe_occ}};
  }
  if (report.depth) {
    const DepthMetrics& d = *report.depth;
    j["depth"] = {{"abs_rel", d.abs_rel}, {"sq_rel", d.sq_rel},
                  {"rmse", d.rmse},       {"rmse_log", d.rmse_log},
                  {"a1", d.a1},           {"a2", d.a2},
                  {"a3", d.a3}};
  }
  if (report.odometry) {
    const OdometryMetrics& o = *report.odometry;
    j["odometry"] = {{"t_err_percent", o.t_err_percent},
                     {"r_err_deg_per_100m", o.r_err_deg_per_100m}};
  }
  return j.dump(2) + "\n";
}

std::string metric_report_table(const MetricReport& report) {
  std::ostringstream out;
  char buf[128];
  const auto row = [&](const char* name, double value, const char* unit) {
    std::snprintf(buf, sizeof(buf), "%-10s %12.6f %s\n", name, value, unit);
    out << buf;
  };
  if (report.scene_flow) {
    const SceneFlowMetrics& s = *report.scene_flow;
    out << "scene flow\n----------\n";
    row("D1-all", s.d1_all, "%");
    row("D2-all", s.d2_all, "%");
    row("F1-all", s.f1_all, "%");
    row("SF-all", s.sf_all, "%");
    row("EPE-all", s.epe_all, "px");
    row("EPE-noc", s.epe_noc, "px");
    row("EPE-occ", s.epe_occ, "px");
  }
  if (report.depth) {
    const DepthMetrics& d = *report.depth;
    out << "depth\n-----\n";
    row("AbsRel", d.abs_rel, "");
    row("SqRel", d.sq_rel, "");
    row("RMSE", d.rmse, "m");
    row("logRMSE", d.rmse_log, "");
    row("A1", d.a1, "");
    row("A2", d.a2, "");
    row("A3", d.a3, "");
  }
  if (report.odometry) {
    const OdometryMetrics& o = *report.odometry;
    out << "odometry\n--------\n";
    row("t_err", o.t_err_percent, "%");
    row("r_err", o.r_err_deg_per_100m, "deg/100m");
  }
  return out.str();
}

}  // namespace rigidflow
