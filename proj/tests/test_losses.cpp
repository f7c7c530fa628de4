// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oracles.hpp"
#include "rigidflow/losses.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {
namespace {

Image random_image(SplitMix64& rng, int height, int width) {
  Image img(height, width, Eigen::Vector3d::Zero());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img(y, x) = Eigen::Vector3d(rng.next_uniform(), rng.next_uniform(),
                                  rng.next_uniform());
    }
  }
  return img;
}

// Static scene: both frames identical, flat depth, centered camera.
SceneFrame static_frame(SplitMix64& rng, int h, int w, double depth) {
  SceneFrame f;
  f.i1 = random_image(rng, h, w);
  f.i2 = f.i1;
  f.d1 = DepthMap(h, w, depth);
  f.d2 = DepthMap(h, w, depth);
  f.camera = {60.0, 60.0, (w - 1) / 2.0, (h - 1) / 2.0, 0.54};
  return f;
}

MotionEstimate identity_estimate(const SceneFrame& frame) {
  const int h = frame.height();
  const int w = frame.width();
  return MotionEstimate::compute(
      field_from_constant(RigidTransform::identity(), h, w),
      SoftMask(h, w, 1.0), frame);
}

TEST_CASE("temporal photometric loss vanishes on a static scene") {
  SplitMix64 rng(21);
  const SceneFrame frame = static_frame(rng, 10, 12, 8.0);
  const MotionEstimate est = identity_estimate(frame);
  CHECK(loss_temporal_photometric(frame, est, BinaryMask(10, 12, 1), 0.15) <
        1e-10);
}

TEST_CASE("all-zero occlusion mask silences the photometric terms") {
  SplitMix64 rng(22);
  SceneFrame frame = static_frame(rng, 8, 9, 5.0);
  frame.i2 = random_image(rng, 8, 9);  // non-trivial residual
  const MotionEstimate est = identity_estimate(frame);
  const BinaryMask zero(8, 9, 0);
  CHECK(loss_temporal_photometric(frame, est, zero, 0.15) == 0.0);
  CHECK(loss_ego_photometric(frame, est, zero, BinaryMask(8, 9, 1), 0.15) ==
        0.0);
  CHECK(loss_ego_photometric(frame, est, BinaryMask(8, 9, 1), zero, 0.15) ==
        0.0);
}

TEST_CASE("geometric loss is 0.5 for depths 1 vs 3 and 0 when equal") {
  SplitMix64 rng(23);
  SceneFrame frame = static_frame(rng, 6, 7, 1.0);
  frame.d2 = DepthMap(6, 7, 3.0);
  const MotionEstimate est = identity_estimate(frame);
  CHECK(loss_geometric(frame, est, BinaryMask(6, 7, 1)) ==
        doctest::Approx(0.5).epsilon(1e-12));

  const SceneFrame equal = static_frame(rng, 6, 7, 2.0);
  CHECK(loss_geometric(equal, identity_estimate(equal), BinaryMask(6, 7, 1)) <
        1e-12);
}

TEST_CASE("geometric loss rejects non-positive depth in the valid region") {
  SplitMix64 rng(24);
  SceneFrame frame = static_frame(rng, 5, 5, 1.0);
  frame.d2.values(2, 2) = -1.0;  // valid flag stays set
  const MotionEstimate est = identity_estimate(frame);
  CHECK_THROWS_AS(loss_geometric(frame, est, BinaryMask(5, 5, 1)),
                  InvalidInput);
}

TEST_CASE("smoothness of a constant grid is zero for both orders") {
  const Grid<double> o(6, 8, 0.375);
  const Image i1 = constant_image(6, 8, 0.5);
  CHECK(loss_smoothness(channel_view(o), i1, 1, 10.0) == 0.0);
  CHECK(loss_smoothness(channel_view(o), i1, 2, 10.0) == 0.0);
  CHECK_THROWS_AS(loss_smoothness(channel_view(o), i1, 3, 10.0), InvalidInput);
}

TEST_CASE("first-order smoothness of a ramp is slope*(W-1)/W on flat images") {
  const int h = 4, w = 10;
  Grid<double> o(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) o(y, x) = 0.25 * x;
  }
  const Image flat = constant_image(h, w, 0.5);
  CHECK(loss_smoothness(channel_view(o), flat, 1, 10.0) ==
        doctest::Approx(0.25 * (w - 1) / w).epsilon(1e-12));
  // The second difference of a linear ramp vanishes.
  CHECK(loss_smoothness(channel_view(o), flat, 2, 10.0) < 1e-15);
}

TEST_CASE("an image edge suppresses the smoothness penalty by exp(-beta*g)") {
  const int w = 10;
  Grid<double> o(1, w, 0.0);
  Image flat = constant_image(1, w, 0.5);
  Image edged(1, w, Eigen::Vector3d::Zero());
  for (int x = 0; x < w; ++x) {
    o(0, x) = x >= 4 ? 1.0 : 0.0;
    edged(0, x) = Eigen::Vector3d::Constant(x >= 4 ? 0.8 : 0.2);
  }
  const double on_flat = loss_smoothness(channel_view(o), flat, 1, 10.0);
  const double on_edge = loss_smoothness(channel_view(o), edged, 1, 10.0);
  CHECK(on_flat == doctest::Approx(1.0 / w).epsilon(1e-12));
  CHECK(on_edge / on_flat == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("smoothness total vanishes for constant motion over constant depth") {
  SplitMix64 rng(25);
  SceneFrame frame = static_frame(rng, 8, 10, 6.0);
  frame.i1 = constant_image(8, 10, 0.5);
  frame.i2 = frame.i1;
  const MotionEstimate est = identity_estimate(frame);
  CHECK(loss_smoothness_total(est, frame.d1, frame.i1, LossWeights{}) < 1e-12);
}

TEST_CASE("smoothness total is linear in each lambda") {
  SplitMix64 rng(26);
  SceneFrame frame = static_frame(rng, 8, 10, 6.0);
  // A spatially varying field so every sub-term is nonzero.
  SE3Field field(8, 10);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 10; ++x) {
      field.transforms(y, x) = exp(Twist({0.01 * x, 0.005 * y, 0.002 * x * y},
                                         {0.001 * y, -0.001 * x, 0.0005 * x}));
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 10; ++x) {
      frame.d1.values(y, x) = 5.0 + 0.1 * x + 0.05 * y * y;
    }
  }
  const MotionEstimate est =
      MotionEstimate::compute(field, SoftMask(8, 10, 1.0), frame);

  LossWeights w0;
  w0.lambda_sf = 0.0;
  LossWeights w1;
  w1.lambda_sf = 1.0;
  LossWeights w2;
  w2.lambda_sf = 2.0;
  const double s0 = loss_smoothness_total(est, frame.d1, frame.i1, w0);
  const double s1 = loss_smoothness_total(est, frame.d1, frame.i1, w1);
  const double s2 = loss_smoothness_total(est, frame.d1, frame.i1, w2);
  CHECK(s2 - s0 == doctest::Approx(2.0 * (s1 - s0)).epsilon(1e-12));
  CHECK(s1 > s0);  // the flow term contributes
}

TEST_CASE("motion consistency vanishes for a constant field") {
  SplitMix64 rng(27);
  const SceneFrame frame = static_frame(rng, 5, 6, 7.0);
  const MotionEstimate est = MotionEstimate::compute(
      field_from_constant(exp(Twist({0.1, -0.05, 0.2}, {0.02, 0.01, -0.03})),
                          5, 6),
      SoftMask(5, 6, 0.8), frame);
  CHECK(loss_motion_consistency(est) < 1e-12);
}

TEST_CASE("motion consistency of a two-pixel field is |delta|_1 / 2") {
  SceneFrame frame;
  SplitMix64 rng(28);
  frame.i1 = random_image(rng, 1, 2);
  frame.i2 = frame.i1;
  frame.d1 = DepthMap(1, 2, 10.0);
  frame.d2 = DepthMap(1, 2, 10.0);
  frame.camera = {60.0, 60.0, 0.5, 0.0, 0.54};

  const Twist xi({0.05, -0.02, 0.03}, {0.01, -0.02, 0.015});
  const Twist delta({0.02, 0.01, -0.03}, {0.004, -0.006, 0.002});
  SE3Field field(1, 2);
  field.transforms(0, 0) = exp(xi);
  field.transforms(0, 1) = exp(xi + delta);
  const MotionEstimate est =
      MotionEstimate::compute(field, SoftMask(1, 2, 1.0), frame);

  const double l1 = delta.vector().cwiseAbs().sum();
  CHECK(loss_motion_consistency(est) ==
        doctest::Approx(l1 / 2.0).epsilon(1e-9));
}

TEST_CASE("single-pixel mask support pins the ego motion to that pixel") {
  SceneFrame frame;
  SplitMix64 rng(29);
  frame.i1 = random_image(rng, 2, 3);
  frame.i2 = frame.i1;
  frame.d1 = DepthMap(2, 3, 10.0);
  frame.d2 = DepthMap(2, 3, 10.0);
  frame.camera = {60.0, 60.0, 1.0, 0.5, 0.54};

  SE3Field field(2, 3);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      field.transforms(y, x) =
          exp(Twist({0.1 * x, 0.05 * y, 0.0}, {0.0, 0.0, 0.01 * (x + y)}));
    }
  }
  SoftMask mask(2, 3, 0.0);
  mask(1, 2) = 1.0;
  const MotionEstimate est = MotionEstimate::compute(field, mask, frame);
  CHECK(loss_motion_consistency(est) < 1e-12);
}

TEST_CASE("mask regularization hits its closed-form values") {
  CHECK(loss_mask_regularization(SoftMask(4, 5, 1.0), 1.0) == 0.0);
  CHECK(loss_mask_regularization(SoftMask(4, 5, 0.0), 1.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(loss_mask_regularization(SoftMask(4, 5, 0.5), 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(loss_mask_regularization(SoftMask(4, 5, 0.5), 0.0),
                  InvalidInput);
}

TEST_CASE("stereo anchoring vanishes when the right view matches exactly") {
  // Integer ground-truth disparity 4: right(x) = i1(x + 4), so the warp
  // reproduces i1 bit for bit on the valid region, and the strip that
  // cannot be warped is backfilled from i1 and carries no error.
  SplitMix64 rng(30);
  const int h = 16, w = 132;
  SceneFrame frame = static_frame(rng, h, w, 0.0);
  frame.camera = {64.0, 64.0, (w - 1) / 2.0, (h - 1) / 2.0, 0.5};
  const double depth = 64.0 * 0.5 / 4.0;  // disparity exactly 4
  frame.d1 = DepthMap(h, w, depth);
  frame.d2 = DepthMap(h, w, depth);
  Image right(h, w, Eigen::Vector3d::Zero());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      right(y, x) = frame.i1(y, std::min(x + 4, w - 1));
    }
  }
  frame.right = right;
  const double exact = loss_spatial_photometric(frame, 0.15);
  CHECK(exact == 0.0);

  // Halving the disparity (doubling the depth) misaligns the warp.
  SceneFrame off = frame;
  off.d1 = DepthMap(h, w, 2.0 * depth);
  CHECK(loss_spatial_photometric(off, 0.15) > exact);

  SceneFrame mono = frame;
  mono.right.reset();
  CHECK_THROWS_AS(loss_spatial_photometric(mono, 0.15), InvalidInput);
}

TEST_CASE("stereo anchoring on constant identical views vanishes") {
  SceneFrame frame;
  const int h = 8, w = 132;
  frame.i1 = constant_image(h, w, 0.4);
  frame.i2 = frame.i1;
  frame.right = frame.i1;
  frame.camera = {60.0, 60.0, (w - 1) / 2.0, (h - 1) / 2.0, 0.5};
  frame.d1 = DepthMap(h, w, 30.0);  // disparity 1
  frame.d2 = frame.d1;
  CHECK(loss_spatial_photometric(frame, 0.15) == 0.0);
}

TEST_CASE("total loss composes the breakdown with decay weights") {
  SplitMix64 rng(31);
  SceneFrame frame = static_frame(rng, 10, 12, 8.0);
  frame.i2 = random_image(rng, 10, 12);

  SE3Field field(10, 12);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) {
      field.transforms(y, x) =
          exp(Twist({0.02 * x, 0.01 * y, 0.05}, {0.001 * x, 0.0, -0.002 * y}));
    }
  }
  SoftMask mask(10, 12, 0.0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) mask(y, x) = 0.3 + 0.05 * ((x + y) % 10);
  }
  std::vector<MotionEstimate> ests;
  ests.push_back(identity_estimate(frame));
  ests.push_back(MotionEstimate::compute(field, mask, frame));

  LossMasks masks;
  masks.m_noc = BinaryMask(10, 12, 1);
  const LossWeights weights;

  const LossBreakdown one = loss_total(frame, {ests[1]}, masks, weights);
  REQUIRE(one.iterations.size() == 1);
  CHECK(one.iterations[0].weight == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(one.l_d == 0.0);  // no right view

  const LossBreakdown two = loss_total(frame, ests, masks, weights);
  REQUIRE(two.iterations.size() == 2);
  CHECK(two.iterations[0].weight == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(two.iterations[1].weight == doctest::Approx(1.0).epsilon(1e-15));

  double expect = two.l_d;
  for (const IterationLosses& it : two.iterations) {
    expect += it.weight *
              (it.l_p + it.l_p_ego + weights.lambda_g * it.l_g +
               weights.lambda_s * it.l_s + weights.lambda_c * it.l_c +
               weights.lambda_m * it.l_m);
  }
  CHECK(two.total == doctest::Approx(expect).epsilon(1e-12));

  // Scaling a lambda scales exactly that term's contribution.
  LossWeights wg0 = weights;
  wg0.lambda_g = 0.0;
  LossWeights wg3 = weights;
  wg3.lambda_g = 0.3;
  const double t0 = loss_total(frame, ests, masks, wg0).total;
  const double t1 = two.total;
  const double t3 = loss_total(frame, ests, masks, wg3).total;
  CHECK(t3 - t0 == doctest::Approx(3.0 * (t1 - t0)).epsilon(1e-9));
}

TEST_CASE("total loss is bitwise deterministic across thread budgets") {
  SplitMix64 rng(32);
  SceneFrame frame = static_frame(rng, 32, 40, 9.0);
  frame.i2 = random_image(rng, 32, 40);
  Image right = random_image(rng, 32, 40);
  frame.right = right;

  SE3Field field(32, 40);
  SoftMask mask(32, 40, 0.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 40; ++x) {
      field.transforms(y, x) = exp(
          Twist({0.01 * x, 0.004 * y, 0.03}, {0.0005 * y, -0.0004 * x, 0.001}));
      mask(y, x) = 0.2 + 0.6 * ((x * 13 + y * 7) % 11) / 10.0;
    }
  }
  std::vector<MotionEstimate> ests;
  ests.push_back(MotionEstimate::compute(field, mask, frame));

  LossMasks masks;
  masks.m_noc = BinaryMask(32, 40, 1);  // m_ol recomputed per iteration

  setenv("EMRMSF_THREADS", "1", 1);
  const LossBreakdown serial = loss_total(frame, ests, masks, LossWeights{});
  setenv("EMRMSF_THREADS", "4", 1);
  const LossBreakdown parallel = loss_total(frame, ests, masks, LossWeights{});
  unsetenv("EMRMSF_THREADS");

  CHECK(serial.total == parallel.total);
  CHECK(serial.l_d == parallel.l_d);
  CHECK(serial.iterations[0].l_p == parallel.iterations[0].l_p);
  CHECK(serial.iterations[0].l_g == parallel.iterations[0].l_g);
  CHECK(serial.iterations[0].l_s == parallel.iterations[0].l_s);
}

}  // namespace
}  // namespace rigidflow
