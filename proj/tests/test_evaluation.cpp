// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rigidflow/evaluation.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {
namespace {

using testing::random_transform;
using testing::transform_distance;

Grid<double> random_positive(SplitMix64& rng, int h, int w, double lo,
                             double hi) {
  Grid<double> g(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) g(y, x) = rng.next_uniform(lo, hi);
  }
  return g;
}

FlowField random_flow(SplitMix64& rng, int h, int w, double range) {
  FlowField f(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.values(y, x) = Eigen::Vector2d(rng.next_uniform(-range, range),
                                       rng.next_uniform(-range, range));
    }
  }
  return f;
}

// Straight constant-speed trajectory along the given axis, identity
// rotations: path distance between consecutive poses is exactly one meter.
Trajectory straight_line(int poses, const Vector3& axis) {
  Trajectory t;
  t.reserve(poses);
  for (int i = 0; i < poses; ++i) {
    t.emplace_back(Eigen::Quaterniond::Identity(), axis * double(i));
  }
  return t;
}

Trajectory random_trajectory(SplitMix64& rng, int poses) {
  Trajectory t;
  t.reserve(poses);
  for (int i = 0; i < poses; ++i) {
    Vector3 p(rng.next_uniform(-10, 10), rng.next_uniform(-10, 10),
              rng.next_uniform(-10, 10));
    t.emplace_back(random_transform(rng, 0.0, 2.0).rotation(), p);
  }
  return t;
}

// Sum of squared alignment residuals |gt_i - (s R pred_i + t)|^2.
double alignment_residual(const Alignment& a, const Trajectory& pred,
                          const Trajectory& gt) {
  const Matrix3 r = a.transform.rotation_matrix();
  const Vector3 t = a.transform.translation();
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vector3 mapped = a.scale * (r * pred[i].translation()) + t;
    sum += (gt[i].translation() - mapped).squaredNorm();
  }
  return sum;
}

}  // namespace

TEST_CASE("disparity outliers follow the dual absolute/relative threshold") {
  SplitMix64 rng(0x5eed0e5a01ull);
  Grid<double> gt = random_positive(rng, 6, 7, 5.0, 120.0);
  Grid<double> pred = gt;
  BinaryMask valid(6, 7, 1);
  const OutlierResult same = disparity_outliers(pred, gt, valid);
  CHECK(same.percent == 0.0);
  CHECK(same.valid_count == 42);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 7; ++x) CHECK(same.outliers(y, x) == 0);
  }

  // Both gates must trip: 3 px alone or 5% alone is still an inlier.
  Grid<double> g2(1, 4, 0.0), p2(1, 4, 0.0);
  g2(0, 0) = 50.0, p2(0, 0) = 54.0;   // 4 px, 8%: outlier
  g2(0, 1) = 100.0, p2(0, 1) = 104.0; // 4 px, 4%: inlier
  g2(0, 2) = 10.0, p2(0, 2) = 13.0;   // 3 px not > 3 px: inlier
  g2(0, 3) = 80.0, p2(0, 3) = 84.0;   // 5% not > 5%: inlier
  const OutlierResult r2 = disparity_outliers(p2, g2, BinaryMask(1, 4, 1));
  CHECK(r2.percent == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(r2.outliers(0, 0) == 1);
  CHECK(r2.outliers(0, 1) == 0);
  CHECK(r2.outliers(0, 2) == 0);
  CHECK(r2.outliers(0, 3) == 0);
}

TEST_CASE("disparity outliers: half rate, invalid exclusion, empty domain") {
  Grid<double> gt(1, 10, 20.0);
  Grid<double> pred(1, 10, 20.0);
  for (int x = 0; x < 5; ++x) pred(0, x) = 30.0;  // 10 px, 50%
  const OutlierResult half = disparity_outliers(pred, gt, BinaryMask(1, 10, 1));
  CHECK(half.percent == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(half.valid_count == 10);

  // An invalid pixel contributes neither to the rate nor to the mask.
  Grid<double> g3(1, 3, 20.0), p3(1, 3, 20.0);
  p3(0, 0) = 30.0;
  p3(0, 2) = 999.0;
  BinaryMask v3(1, 3, 1);
  v3(0, 2) = 0;
  const OutlierResult r3 = disparity_outliers(p3, g3, v3);
  CHECK(r3.percent == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(r3.valid_count == 2);
  CHECK(r3.outliers(0, 2) == 0);

  CHECK_THROWS_AS(disparity_outliers(pred, gt, BinaryMask(1, 10, 0)),
                  InvalidInput);
}

TEST_CASE("flow outliers and endpoint error on constructed offsets") {
  SplitMix64 rng(0x5eed0e5a02ull);
  FlowField gt = random_flow(rng, 5, 6, 20.0);
  FlowField pred = gt;
  BinaryMask valid(5, 6, 1);
  CHECK(flow_outliers(pred, gt, valid).percent == 0.0);
  CHECK(epe(pred, gt, valid) == 0.0);

  // |gt| = 10, offset 4 px: EPE 4 trips both gates.
  FlowField g2(2, 3), p2(2, 3);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      g2.values(y, x) = Eigen::Vector2d(10.0, 0.0);
      p2.values(y, x) = Eigen::Vector2d(14.0, 0.0);
    }
  }
  BinaryMask v2(2, 3, 1);
  CHECK(flow_outliers(p2, g2, v2).percent ==
        doctest::Approx(100.0).epsilon(1e-12));
  CHECK(epe(p2, g2, v2) == doctest::Approx(4.0).epsilon(1e-12));

  // Same 4 px offset on |gt| = 100 is only 4%: inlier.
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      g2.values(y, x) = Eigen::Vector2d(100.0, 0.0);
      p2.values(y, x) = Eigen::Vector2d(104.0, 0.0);
    }
  }
  CHECK(flow_outliers(p2, g2, v2).percent == 0.0);

  // EPE below 3 px is never an outlier regardless of the relative gate.
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      g2.values(y, x) = Eigen::Vector2d(10.0, 0.0);
      p2.values(y, x) = Eigen::Vector2d(10.0, 2.9);
    }
  }
  CHECK(flow_outliers(p2, g2, v2).percent == 0.0);

  CHECK_THROWS_AS(flow_outliers(pred, gt, BinaryMask(5, 6, 0)), InvalidInput);
  // The EPE reduction is defined as zero over an empty mask so that the
  // occluded split of a fully non-occluded scene stays well defined.
  CHECK(epe(pred, gt, BinaryMask(5, 6, 0)) == 0.0);
}

TEST_CASE("endpoint error partitions across complementary masks") {
  SplitMix64 rng(0x5eed0e5a03ull);
  const int h = 8, w = 11;
  FlowField gt = random_flow(rng, h, w, 15.0);
  FlowField pred = random_flow(rng, h, w, 15.0);
  BinaryMask valid(h, w, 0), noc(h, w, 0), occ(h, w, 0);
  long n_all = 0, n_noc = 0, n_occ = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (rng.next_uniform() < 0.8) {
        valid(y, x) = 1;
        ++n_all;
        if (rng.next_uniform() < 0.5) {
          noc(y, x) = 1;
          ++n_noc;
        } else {
          occ(y, x) = 1;
          ++n_occ;
        }
      }
    }
  }
  REQUIRE(n_noc > 0);
  REQUIRE(n_occ > 0);
  const double e_all = epe(pred, gt, valid);
  const double e_noc = epe(pred, gt, noc);
  const double e_occ = epe(pred, gt, occ);
  CHECK(e_all * double(n_all) ==
        doctest::Approx(e_noc * double(n_noc) + e_occ * double(n_occ))
            .epsilon(1e-12));
}

TEST_CASE("scene-flow outlier union: empty, disjoint, nested, union bound") {
  BinaryMask valid(10, 10, 1);
  BinaryMask none(10, 10, 0);
  CHECK(sceneflow_outliers(none, none, none, valid) == 0.0);

  BinaryMask d1(10, 10, 0), d2(10, 10, 0), f1(10, 10, 0);
  for (int x = 0; x < 10; ++x) d1(0, x) = 1;
  for (int x = 0; x < 10; ++x) d2(1, x) = 1;
  for (int x = 0; x < 10; ++x) f1(2, x) = 1;
  CHECK(sceneflow_outliers(d1, d2, f1, valid) ==
        doctest::Approx(30.0).epsilon(1e-12));

  // Nested sets: the union is the largest of the three.
  BinaryMask n1(10, 10, 0), n2(10, 10, 0), n3(10, 10, 0);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 10; ++x) {
      if (y < 1) n1(y, x) = 1;
      if (y < 2) n2(y, x) = 1;
      n3(y, x) = 1;
    }
  }
  CHECK(sceneflow_outliers(n1, n2, n3, valid) ==
        doctest::Approx(30.0).epsilon(1e-12));

  SplitMix64 rng(0x5eed0e5a04ull);
  BinaryMask r1(10, 10, 0), r2(10, 10, 0), r3(10, 10, 0);
  long c1 = 0, c2 = 0, c3 = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      if (rng.next_uniform() < 0.2) r1(y, x) = 1, ++c1;
      if (rng.next_uniform() < 0.2) r2(y, x) = 1, ++c2;
      if (rng.next_uniform() < 0.2) r3(y, x) = 1, ++c3;
    }
  }
  const double sf = sceneflow_outliers(r1, r2, r3, valid);
  const double worst = double(std::max({c1, c2, c3}));
  CHECK(sf >= worst - 1e-12);
  CHECK(sf <= double(c1 + c2 + c3) + 1e-12);

  CHECK_THROWS_AS(sceneflow_outliers(BinaryMask(9, 10, 0), d2, f1, valid),
                  InvalidInput);
  CHECK_THROWS_AS(sceneflow_outliers(d1, d2, f1, BinaryMask(10, 10, 0)),
                  InvalidInput);
}

TEST_CASE("depth metrics: identity, uniform ratios, delta bands") {
  SplitMix64 rng(0x5eed0e5a05ull);
  const int h = 4, w = 5;
  DepthMap gt(h, w, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) gt.values(y, x) = rng.next_uniform(5.0, 39.0);
  }
  DepthMap pred = gt;
  const DepthMetrics id = depth_metrics(pred, gt, BinaryMask(h, w, 1));
  CHECK(id.abs_rel == 0.0);
  CHECK(id.sq_rel == 0.0);
  CHECK(id.rmse == 0.0);
  CHECK(id.rmse_log == 0.0);
  CHECK(id.a1 == 1.0);
  CHECK(id.a2 == 1.0);
  CHECK(id.a3 == 1.0);

  // Uniform doubling: AbsRel 1, logRMSE ln 2, every delta band misses.
  double mean_g = 0.0, mean_g2 = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      pred.values(y, x) = 2.0 * gt.values(y, x);
      mean_g += gt.values(y, x);
      mean_g2 += gt.values(y, x) * gt.values(y, x);
    }
  }
  mean_g /= h * w;
  mean_g2 /= h * w;
  const DepthMetrics twice = depth_metrics(pred, gt, BinaryMask(h, w, 1));
  CHECK(twice.abs_rel == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(twice.sq_rel == doctest::Approx(mean_g).epsilon(1e-12));
  CHECK(twice.rmse == doctest::Approx(std::sqrt(mean_g2)).epsilon(1e-12));
  CHECK(twice.rmse_log == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(twice.a1 == 0.0);
  CHECK(twice.a2 == 0.0);
  CHECK(twice.a3 == 0.0);

  // delta = 1.2 sits inside the first band, 1.3 only in the second,
  // 1.9 only in the third.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) pred.values(y, x) = 1.2 * gt.values(y, x);
  }
  const DepthMetrics d12 = depth_metrics(pred, gt, BinaryMask(h, w, 1));
  CHECK(d12.a1 == 1.0);
  CHECK(d12.abs_rel == doctest::Approx(0.2).epsilon(1e-12));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) pred.values(y, x) = 1.3 * gt.values(y, x);
  }
  const DepthMetrics d13 = depth_metrics(pred, gt, BinaryMask(h, w, 1));
  CHECK(d13.a1 == 0.0);
  CHECK(d13.a2 == 1.0);
  CHECK(d13.a3 == 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) pred.values(y, x) = 1.9 * gt.values(y, x);
  }
  const DepthMetrics d19 = depth_metrics(pred, gt, BinaryMask(h, w, 1));
  CHECK(d19.a2 == 0.0);
  CHECK(d19.a3 == 1.0);
}

TEST_CASE("depth metrics: clamping, ignored ground truth, median scaling") {
  // Prediction clamped to the 80 m cap before comparison.
  DepthMap gt(1, 1, 79.0), pred(1, 1, 100.0);
  const DepthMetrics capped = depth_metrics(pred, gt, BinaryMask(1, 1, 1));
  CHECK(capped.abs_rel == doctest::Approx(1.0 / 79.0).epsilon(1e-12));
  CHECK(capped.a1 == 1.0);  // 80/79 < 1.25

  // Prediction clamped up to the 1e-3 m floor.
  DepthMap gt_lo(1, 1, 0.002), pred_lo(1, 1, 1e-9);
  const DepthMetrics floored =
      depth_metrics(pred_lo, gt_lo, BinaryMask(1, 1, 1));
  CHECK(floored.abs_rel == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(floored.a1 == 0.0);  // delta = 2

  // Ground truth outside (min_depth, cap) is ignored entirely.
  DepthMap gt3(1, 3, 1.0), pred3(1, 3, 1.0);
  gt3.values(0, 0) = 10.0, pred3.values(0, 0) = 10.0;
  gt3.values(0, 1) = 100.0, pred3.values(0, 1) = 1.0;
  gt3.values(0, 2) = 5e-4, pred3.values(0, 2) = 1.0;
  const DepthMetrics ignored = depth_metrics(pred3, gt3, BinaryMask(1, 3, 1));
  CHECK(ignored.abs_rel == 0.0);
  CHECK(ignored.a1 == 1.0);

  // Median scaling removes a uniform factor exactly (odd pixel count).
  DepthMap gt5(1, 5, 1.0), pred5(1, 5, 1.0);
  const double depths[5] = {5.0, 10.0, 20.0, 30.0, 40.0};
  for (int x = 0; x < 5; ++x) {
    gt5.values(0, x) = depths[x];
    pred5.values(0, x) = 2.0 * depths[x];
  }
  const DepthMetrics unscaled = depth_metrics(pred5, gt5, BinaryMask(1, 5, 1));
  CHECK(unscaled.abs_rel == doctest::Approx(1.0).epsilon(1e-12));
  const DepthMetrics scaled = depth_metrics(
      pred5, gt5, BinaryMask(1, 5, 1), kDepthCap, kDepthMin, true);
  CHECK(scaled.abs_rel == 0.0);
  CHECK(scaled.a1 == 1.0);
}

TEST_CASE("depth metrics: band nesting holds for random inputs") {
  SplitMix64 rng(0x5eed0e5a06ull);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 3 + int(rng.next_uniform() * 4);
    const int w = 3 + int(rng.next_uniform() * 4);
    DepthMap gt(h, w, 1.0), pred(h, w, 1.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        gt.values(y, x) = rng.next_uniform(1.0, 79.0);
        pred.values(y, x) = rng.next_uniform(1.0, 79.0);
      }
    }
    const DepthMetrics m = depth_metrics(pred, gt, BinaryMask(h, w, 1));
    CHECK(m.a1 <= m.a2);
    CHECK(m.a2 <= m.a3);
    CHECK(m.a3 <= 1.0);
    CHECK(m.abs_rel >= 0.0);
    CHECK(m.rmse >= 0.0);
  }

  DepthMap gt(2, 2, 10.0), pred(2, 2, 10.0);
  CHECK_THROWS_AS(depth_metrics(pred, gt, BinaryMask(2, 2, 0)), InvalidInput);
  // All ground truth out of range leaves nothing to evaluate.
  DepthMap far_gt(2, 2, 200.0);
  CHECK_THROWS_AS(depth_metrics(pred, far_gt, BinaryMask(2, 2, 1)),
                  InvalidInput);
}

TEST_CASE("umeyama: identity, pure scale, rigid mode") {
  SplitMix64 rng(0x5eed0e5a07ull);
  const Trajectory gt = random_trajectory(rng, 12);
  const Alignment id = umeyama_align(gt, gt, true);
  CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(transform_distance(id.transform, RigidTransform::identity()) < 1e-9);

  Trajectory half = gt;
  for (auto& p : half) {
    p = RigidTransform(p.rotation(), 0.5 * p.translation());
  }
  const Alignment sim = umeyama_align(half, gt, true);
  CHECK(sim.scale == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(transform_distance(sim.transform, RigidTransform::identity()) < 1e-9);

  // Rigid mode pins the scale at exactly one.
  const Alignment rigid = umeyama_align(half, gt, false);
  CHECK(rigid.scale == 1.0);

  // Exact rigid motion is recovered exactly in rigid mode.
  const RigidTransform t0 = random_transform(rng, 5.0, 2.0);
  Trajectory moved = gt;
  for (auto& p : moved) {
    p = RigidTransform(p.rotation(), act(t0, p.translation()));
  }
  const Alignment rec = umeyama_align(gt, moved, false);
  CHECK(rec.scale == 1.0);
  CHECK(transform_distance(rec.transform, t0) < 1e-9);
}

TEST_CASE("umeyama: noisy similarity recovery") {
  SplitMix64 rng(0x5eed0e5a08ull);
  const RigidTransform t0 = random_transform(rng, 5.0, 2.0);
  Trajectory pred, gt;
  for (int i = 0; i < 50; ++i) {
    const Vector3 p(rng.next_uniform(-10, 10), rng.next_uniform(-10, 10),
                    rng.next_uniform(-10, 10));
    const Vector3 noise(rng.next_normal() * 1e-6, rng.next_normal() * 1e-6,
                        rng.next_normal() * 1e-6);
    pred.emplace_back(Eigen::Quaterniond::Identity(), p);
    gt.emplace_back(Eigen::Quaterniond::Identity(), act(t0, p) + noise);
  }
  const Alignment a = umeyama_align(pred, gt, true);
  CHECK(a.scale == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(transform_distance(a.transform, t0) < 1e-4);
}

TEST_CASE("umeyama: degenerate and invalid inputs") {
  Trajectory line, point;
  for (int i = 0; i < 10; ++i) {
    line.emplace_back(Eigen::Quaterniond::Identity(),
                      Vector3(double(i), 2.0 * i, -double(i)));
    point.emplace_back(Eigen::Quaterniond::Identity(), Vector3(1, 2, 3));
  }
  CHECK_THROWS_AS(umeyama_align(line, line, true), NearSingular);
  CHECK_THROWS_AS(umeyama_align(point, point, false), NearSingular);

  SplitMix64 rng(0x5eed0e5a09ull);
  const Trajectory good = random_trajectory(rng, 5);
  Trajectory shorter(good.begin(), good.begin() + 4);
  CHECK_THROWS_AS(umeyama_align(good, shorter, true), InvalidInput);
  Trajectory two(good.begin(), good.begin() + 2);
  CHECK_THROWS_AS(umeyama_align(two, two, true), InvalidInput);
}

TEST_CASE("umeyama: fitted residual beats perturbed alignments") {
  SplitMix64 rng(0x5eed0e5a0aull);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidTransform t0 = random_transform(rng, 4.0, 2.0);
    const double s0 = rng.next_uniform(0.5, 2.0);
    Trajectory pred, gt;
    for (int i = 0; i < 30; ++i) {
      const Vector3 p(rng.next_uniform(-10, 10), rng.next_uniform(-10, 10),
                      rng.next_uniform(-10, 10));
      const Vector3 noise(rng.next_normal() * 0.05, rng.next_normal() * 0.05,
                          rng.next_normal() * 0.05);
      pred.emplace_back(Eigen::Quaterniond::Identity(), p);
      gt.emplace_back(Eigen::Quaterniond::Identity(),
                      s0 * act(t0, p) + noise);
    }
    const Alignment best = umeyama_align(pred, gt, true);
    const double best_res = alignment_residual(best, pred, gt);
    for (int k = 0; k < 20; ++k) {
      Alignment perturbed = best;
      perturbed.scale *= 1.0 + rng.next_uniform(-0.1, 0.1);
      const RigidTransform nudge =
          random_transform(rng, 0.2, rng.next_uniform() * 0.2);
      perturbed.transform = compose(nudge, best.transform);
      CHECK(best_res <= alignment_residual(perturbed, pred, gt) + 1e-9);
    }
  }
}

TEST_CASE("odometry: exact prediction and uniform translation scale") {
  // Curved trajectory, prediction identical to ground truth: both errors
  // vanish identically.
  Trajectory curved;
  for (int i = 0; i < 60; ++i) {
    const double a = 0.02 * i;
    const Eigen::Quaterniond q(std::cos(a), 0.0, std::sin(a), 0.0);
    curved.emplace_back(q, Vector3(30.0 * std::sin(0.05 * i), 0.1 * i,
                                   double(i)));
  }
  // Relative poses are rebuilt through quaternion renormalization, which
  // leaves rounding residue when the rotations are non-trivial.
  const OdometryMetrics zero =
      odometry_errors(curved, curved, std::vector<double>{5.0, 12.5});
  CHECK(zero.t_err_percent < 1e-12);
  CHECK(zero.r_err_deg_per_100m < 1e-12);

  // Uniform 1% translation scaling: every subsequence contributes exactly
  // one percent, so the mean is one percent for any length set.
  const Trajectory line = straight_line(1001, Vector3(1, 0, 0));
  Trajectory scaled = line;
  for (auto& p : scaled) {
    p = RigidTransform(p.rotation(), 1.01 * p.translation());
  }
  const OdometryMetrics one =
      odometry_errors(scaled, line, default_odometry_lengths());
  CHECK(one.t_err_percent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(one.r_err_deg_per_100m == 0.0);
}

TEST_CASE("odometry: yaw drift about the path axis, closed form") {
  // Path along z, drift about z: relative translations are untouched by
  // the drift, so t_err stays zero while r_err follows the closed form.
  const int n = 1001;
  const double rate = 0.01;  // radians per frame
  const Trajectory gt = straight_line(n, Vector3(0, 0, 1));
  Trajectory pred;
  for (int i = 0; i < n; ++i) {
    const double half = 0.5 * rate * i;
    pred.emplace_back(Eigen::Quaterniond(std::cos(half), 0, 0, std::sin(half)),
                      gt[i].translation());
  }
  const OdometryMetrics m =
      odometry_errors(pred, gt, default_odometry_lengths());
  CHECK(m.t_err_percent == 0.0);

  // On a one-meter-per-frame line every length-L subsequence spans exactly
  // L frames and there are n - L of them; the relative rotation angle is
  // rate * L wrapped into [0, pi].
  double num = 0.0;
  long count = 0;
  for (int len = 100; len <= 800; len += 100) {
    const double half = 0.5 * rate * len;
    const double ang =
        2.0 * std::atan2(std::abs(std::sin(half)), std::abs(std::cos(half)));
    const long starts = n - len;
    num += double(starts) * (100.0 * ang * (180.0 / M_PI) / len);
    count += starts;
  }
  CHECK(m.r_err_deg_per_100m ==
        doctest::Approx(num / double(count)).epsilon(1e-9));
}

TEST_CASE("odometry: small constant drift gives a constant rate") {
  // Below the wrap threshold the rate is length-independent:
  // 1e-4 rad/frame at 1 m/frame is 0.01 rad per 100 m.
  const int n = 301;
  const double rate = 1e-4;
  const Trajectory gt = straight_line(n, Vector3(0, 0, 1));
  Trajectory pred;
  for (int i = 0; i < n; ++i) {
    const double half = 0.5 * rate * i;
    pred.emplace_back(Eigen::Quaterniond(std::cos(half), 0, 0, std::sin(half)),
                      gt[i].translation());
  }
  const OdometryMetrics m =
      odometry_errors(pred, gt, std::vector<double>{100.0, 200.0});
  CHECK(m.t_err_percent == 0.0);
  CHECK(m.r_err_deg_per_100m ==
        doctest::Approx(0.01 * 180.0 / M_PI).epsilon(1e-9));
}

TEST_CASE("odometry: error conditions and default lengths") {
  const std::vector<double> want = {100, 200, 300, 400, 500, 600, 700, 800};
  CHECK(default_odometry_lengths() == want);

  const Trajectory line = straight_line(10, Vector3(1, 0, 0));  // 9 m path
  CHECK_THROWS_AS(odometry_errors(line, line, {100.0}), InvalidInput);
  CHECK_THROWS_AS(odometry_errors(line, line, {5.0, 100.0}), InvalidInput);
  CHECK_THROWS_AS(odometry_errors(line, line, {}), InvalidInput);
  CHECK_THROWS_AS(odometry_errors(line, line, {0.0}), InvalidInput);
  CHECK_THROWS_AS(odometry_errors(line, line, {-5.0}), InvalidInput);

  Trajectory shorter(line.begin(), line.begin() + 9);
  CHECK_THROWS_AS(odometry_errors(shorter, line, {5.0}), InvalidInput);
  Trajectory one(line.begin(), line.begin() + 1);
  CHECK_THROWS_AS(odometry_errors(one, one, {5.0}), InvalidInput);

  // Sanity: the 9 m line does support a 5 m subsequence.
  const OdometryMetrics ok = odometry_errors(line, line, {5.0});
  CHECK(ok.t_err_percent == 0.0);
}

TEST_CASE("scene-flow bundle ties the pieces together") {
  SplitMix64 rng(0x5eed0e5a0bull);
  const int h = 6, w = 9;
  Grid<double> d1 = random_positive(rng, h, w, 10.0, 60.0);
  Grid<double> d2 = random_positive(rng, h, w, 10.0, 60.0);
  FlowField flow = random_flow(rng, h, w, 20.0);
  BinaryMask valid(h, w, 1);

  const SceneFlowMetrics perfect =
      evaluate_scene_flow(d1, d2, flow, d1, d2, flow, valid);
  CHECK(perfect.d1_all == 0.0);
  CHECK(perfect.d2_all == 0.0);
  CHECK(perfect.f1_all == 0.0);
  CHECK(perfect.sf_all == 0.0);
  CHECK(perfect.epe_all == 0.0);
  // Without an occlusion mask the non-occluded split is the full EPE.
  CHECK(perfect.epe_noc == perfect.epe_all);
  CHECK(perfect.epe_occ == 0.0);

  // One outlier pixel per channel on a 1x10 strip: 10% each, 30% union.
  Grid<double> g1(1, 10, 20.0), g2(1, 10, 20.0);
  FlowField gf(1, 10);
  for (int x = 0; x < 10; ++x) gf.values(0, x) = Eigen::Vector2d(10.0, 0.0);
  Grid<double> p1 = g1, p2 = g2;
  FlowField pf = gf;
  p1(0, 0) = 30.0;
  p2(0, 1) = 30.0;
  pf.values(0, 2) = Eigen::Vector2d(20.0, 0.0);
  BinaryMask strip(1, 10, 1);
  BinaryMask noc(1, 10, 0);
  for (int x = 0; x < 5; ++x) noc(0, x) = 1;
  const SceneFlowMetrics m =
      evaluate_scene_flow(p1, p2, pf, g1, g2, gf, strip, &noc);
  CHECK(m.d1_all == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(m.d2_all == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(m.f1_all == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(m.sf_all == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(m.epe_all == doctest::Approx(1.0).epsilon(1e-12));
  // The lone flow outlier (EPE 10 at x = 2) lies in the non-occluded half.
  CHECK(m.epe_noc == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.epe_occ == 0.0);
}

TEST_CASE("metric report serialization: JSON keys and table labels") {
  MetricReport report;
  SceneFlowMetrics s;
  s.d1_all = 1.5, s.d2_all = 2.5, s.f1_all = 3.5, s.sf_all = 4.5;
  s.epe_all = 0.75, s.epe_noc = 0.5, s.epe_occ = 1.25;
  DepthMetrics d;
  d.abs_rel = 0.125, d.sq_rel = 0.25, d.rmse = 3.0, d.rmse_log = 0.0625;
  d.a1 = 0.875, d.a2 = 0.9375, d.a3 = 1.0;
  OdometryMetrics o;
  o.t_err_percent = 1.0625, o.r_err_deg_per_100m = 0.03125;
  report.scene_flow = s;
  report.depth = d;
  report.odometry = o;

  const std::string text = metric_report_to_json(report);
  CHECK(text.back() == '\n');
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["scene_flow"]["d1_all"].get<double>() == 1.5);
  CHECK(j["scene_flow"]["epe_occ"].get<double>() == 1.25);
  CHECK(j["depth"]["abs_rel"].get<double>() == 0.125);
  CHECK(j["depth"]["a3"].get<double>() == 1.0);
  CHECK(j["odometry"]["t_err_percent"].get<double>() == 1.0625);
  CHECK(j["odometry"]["r_err_deg_per_100m"].get<double>() == 0.03125);

  MetricReport depth_only;
  depth_only.depth = d;
  const nlohmann::json jd =
      nlohmann::json::parse(metric_report_to_json(depth_only));
  CHECK(jd.contains("depth"));
  CHECK(!jd.contains("scene_flow"));
  CHECK(!jd.contains("odometry"));

  const std::string table = metric_report_table(report);
  CHECK(table.find("D1-all") != std::string::npos);
  CHECK(table.find("EPE-noc") != std::string::npos);
  CHECK(table.find("AbsRel") != std::string::npos);
  CHECK(table.find("t_err") != std::string::npos);
  CHECK(table.find("deg/100m") != std::string::npos);
}

}  // namespace rigidflow
