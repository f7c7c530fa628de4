// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/motion_field.hpp"

#include <array>

namespace rigidflow {

namespace {

// Weighted Lie-algebra mean over the contributing pixels. Compensated,
// serial row order, so results do not depend on evaluation order.
struct WeightedMean {
  Twist mean;
  double mass = 0;
  int excluded = 0;
};

WeightedMean weighted_log_mean(const SE3Field& field, const SoftMask& mask) {
  require_same_shape(field.height(), field.width(), mask.height(),
                     mask.width(), "aggregate_ego_motion");
  const int h = field.height();
  const int w = field.width();

  std::array<KahanSum, 6> num;
  KahanSum den;
  int excluded = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mask(y, x);
      if (m < 0.0 || !is_finite(m)) {
        // Weights need not live in [0, 1]: the mean is invariant to scale.
        throw InvalidInput("mask weight must be finite and non-negative");
      }
      if (!field.valid(y, x)) {
        ++excluded;
        continue;
      }
      const RigidTransform& t = field.transforms(y, x);
      if (t.rotation_angle() > M_PI - kPiMargin) {
        ++excluded;
        continue;
      }
      if (m == 0.0) continue;
      const Vector6 xi = log(t).vector();
      for (int i = 0; i < 6; ++i) num[i].add(m * xi[i]);
      den.add(m);
    }
  }

  WeightedMean result;
  result.mass = den.value();
  result.excluded = excluded;
  if (result.mass > kMaskMassEpsilon) {
    Vector6 mean;
    for (int i = 0; i < 6; ++i) mean[i] = num[i].value() / result.mass;
    result.mean = Twist::from_vector(mean);
  }
  return result;
}

}  // namespace

RigidTransform aggregate_ego_motion(const SE3Field& field,
                                    const SoftMask& mask,
                                    AggregateStats* stats) {
  const WeightedMean wm = weighted_log_mean(field, mask);
  if (wm.mass <= kMaskMassEpsilon) {
    throw EmptySupport("aggregate_ego_motion: mask mass " +
                       std::to_string(wm.mass) + " below threshold");
  }
  if (stats != nullptr) {
    stats->mean_twist = wm.mean;
    stats->mask_mass = wm.mass;
    stats->excluded = wm.excluded;
  }
  return exp(wm.mean);
}

AggregateGradients aggregate_gradients(const SE3Field& field,
                                       const SoftMask& mask,
                                       const Twist& upstream) {
  const WeightedMean wm = weighted_log_mean(field, mask);
  if (wm.mass <= kMaskMassEpsilon) {
    throw EmptySupport("aggregate_gradients: mask mass below threshold");
  }
  const int h = field.height();
  const int w = field.width();
  const Vector6 up = upstream.vector();
  const Vector6 mean = wm.mean.vector();

  AggregateGradients grads;
  grads.d_mask = Grid<double>(h, w, 0.0);
  grads.d_twists = Grid<Twist>(h, w, Twist::zero());

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!field.valid(y, x)) continue;
      const RigidTransform& t = field.transforms(y, x);
      if (t.rotation_angle() > M_PI - kPiMargin) continue;
      const Vector6 xi = log(t).vector();
      const double m = mask(y, x);
      grads.d_twists(y, x) = Twist::from_vector((m / wm.mass) * up);
      grads.d_mask(y, x) = up.dot(xi - mean) / wm.mass;
    }
  }
  return grads;
}

SE3Field field_from_constant(const RigidTransform& t, int height, int width) {
  SE3Field field(height, width);
  field.transforms.fill(t);
  return field;
}

TwistGrid field_log(const SE3Field& field) {
  TwistGrid out(field.height(), field.width());
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      if (!field.valid(y, x)) {
        out.valid(y, x) = 0;
        continue;
      }
      const RigidTransform& t = field.transforms(y, x);
      if (t.rotation_angle() > M_PI - kPiMargin) {
        out.valid(y, x) = 0;
        continue;
      }
      out.twists(y, x) = log(t);
    }
  }
  return out;
}

SE3Field field_exp(const Grid<Twist>& twists) {
  SE3Field field(twists.height(), twists.width());
  for (int y = 0; y < twists.height(); ++y) {
    for (int x = 0; x < twists.width(); ++x) {
      field.transforms(y, x) = exp(twists(y, x));
    }
  }
  return field;
}

}  // namespace rigidflow
