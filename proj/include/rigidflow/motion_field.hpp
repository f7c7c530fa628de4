// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense SE3 motion fields and the ego-motion aggregation (EMA) step: the
// ego-motion is the rigidity-mask-weighted mean of the per-pixel motions,
// taken in the Lie algebra and mapped back to the group.

#pragma once

#include "rigidflow/grid.hpp"
#include "rigidflow/lie_se3.hpp"

namespace rigidflow {

/// Per-pixel rigid motion T assigning each pixel of frame 1 its SE(3)
/// motion into frame 2. Pixels whose per-pixel log is ill-defined
/// (rotation angle within kPiMargin of pi) are marked invalid.
struct SE3Field {
  Grid<RigidTransform> transforms;
  BinaryMask valid;

  SE3Field() = default;
  SE3Field(int height, int width)
      : transforms(height, width), valid(height, width, 1) {}

  int height() const { return transforms.height(); }
  int width() const { return transforms.width(); }
};

/// Per-pixel rigidity probability in [0, 1]: the probability that the
/// pixel belongs to the static (ego-motion-rigid) region.
using SoftMask = Grid<double>;

/// Mass threshold below which the weighted mean has no support and the
/// ego-motion is undefined.
inline constexpr double kMaskMassEpsilon = 1e-6;

/// Extras surfaced by aggregate_ego_motion.
struct AggregateStats {
  Twist mean_twist;       ///< the mask-weighted Lie-algebra mean
  double mask_mass = 0;   ///< sum of mask weights over contributing pixels
  int excluded = 0;       ///< pixels dropped for near-pi rotations/invalidity
};

/// Ego-motion as the mask-weighted mean of per-pixel motion logarithms,
/// mapped back to SE(3):
///
///   T_ego = exp( sum_x M(x) * log(T(x)) / sum_x M(x) )
///
/// Invalid field pixels (including near-pi rotations) contribute zero
/// weight; their count is surfaced through stats. Throws EmptySupport when
/// the contributing mask mass is at or below kMaskMassEpsilon.
RigidTransform aggregate_ego_motion(const SE3Field& field,
                                    const SoftMask& mask,
                                    AggregateStats* stats = nullptr);

/// Gradients of the aggregated mean twist with respect to the mask entries
/// and the per-pixel log-coordinates, contracted with an upstream gradient
/// d(loss)/d(mean twist):
///
///   d(mean)/d(xi_x) = M(x)/sum(M) * I6
///   d(mean)/d(M(x)) = (xi_x - mean) / sum(M)
///
/// Excluded pixels receive zero gradient.
struct AggregateGradients {
  Grid<double> d_mask;
  Grid<Twist> d_twists;
};

AggregateGradients aggregate_gradients(const SE3Field& field,
                                       const SoftMask& mask,
                                       const Twist& upstream);

/// Constant field: every pixel carries the same transform.
SE3Field field_from_constant(const RigidTransform& t, int height, int width);

/// Elementwise log. Near-pi pixels are marked invalid in the output mask
/// (their twist slot is zero); other pixels carry log(T).
struct TwistGrid {
  Grid<Twist> twists;
  BinaryMask valid;

  TwistGrid() = default;
  TwistGrid(int height, int width)
      : twists(height, width), valid(height, width, 1) {}

  int height() const { return twists.height(); }
  int width() const { return twists.width(); }
};

TwistGrid field_log(const SE3Field& field);

/// Elementwise exp of a twist grid.
SE3Field field_exp(const Grid<Twist>& twists);

}  // namespace rigidflow
