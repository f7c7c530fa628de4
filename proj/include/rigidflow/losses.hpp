// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Self-supervision losses over a motion-field estimate: temporal and
// ego-motion photometric terms, geometric consistency, edge-aware
// smoothness, motion consistency against the aggregated ego-motion, mask
// regularization, the stereo anchoring term, and the iteration-decayed
// total. Masked means divide by H*W (not the mask count) throughout;
// only the stereo term averages over its valid pixels.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rigidflow/frame.hpp"
#include "rigidflow/motion_field.hpp"
#include "rigidflow/warp.hpp"

namespace rigidflow {

struct LossWeights {
  double alpha = 0.15;  ///< SSIM share of the photometric error
  double beta = 10.0;   ///< edge-weight sharpness
  double gamma = 1.0;   ///< mask regularization denominator offset
  double zeta = 0.9;    ///< per-iteration weight decay
  double lambda_g = 0.1;
  double lambda_s = 0.1;
  double lambda_c = 0.1;
  double lambda_m = 0.1;
  double lambda_st = 0.001;  ///< twist-grid smoothness
  double lambda_sd = 1.0;    ///< depth smoothness
  double lambda_sf = 1.0;    ///< flow smoothness
  int n_iters = 12;
  /// Divide depth by its valid-pixel mean before the smoothness term.
  bool normalize_depth_smoothness = true;

  void require_valid() const;
};

/// One iteration's estimate plus everything derived from it. Derived
/// fields are computed once in compute() so the losses stay consistent
/// with each other by construction.
struct MotionEstimate {
  SE3Field field;
  SoftMask mask;

  SceneFlowUVD uvd;
  FlowField f12;
  RigidTransform t_ego;
  FlowField f_ego;
  AggregateStats ego_stats;

  static MotionEstimate compute(SE3Field field, SoftMask mask,
                                const SceneFrame& frame);
};

/// Masks gating the photometric terms. A fixed outlier mask may be
/// supplied; when absent, loss_total recomputes it per iteration from
/// that iteration's ego-warp residuals.
struct LossMasks {
  BinaryMask m_noc;
  std::optional<BinaryMask> m_ol;
  double p_lo = 0.05;  ///< outlier quantiles used when recomputing
  double p_hi = 0.80;
};

double loss_temporal_photometric(const SceneFrame& frame,
                                 const MotionEstimate& est,
                                 const BinaryMask& m_noc, double alpha);

double loss_ego_photometric(const SceneFrame& frame, const MotionEstimate& est,
                            const BinaryMask& m_noc, const BinaryMask& m_ol,
                            double alpha);

double loss_geometric(const SceneFrame& frame, const MotionEstimate& est,
                      const BinaryMask& m_noc);

/// Multi-channel view over an arbitrary grid for the smoothness loss.
/// Differences touching a pixel where valid() is false contribute zero.
struct ChannelView {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::function<double(int c, int y, int x)> at;
  std::function<bool(int y, int x)> valid;  // may be null (all valid)
};

ChannelView channel_view(const Grid<double>& g, const BinaryMask* valid = nullptr);
ChannelView channel_view(const FlowField& f);
ChannelView channel_view(const TwistGrid& t);

/// k-th order edge-aware smoothness: mean over pixels and channels of
/// |d^k O / dx^k| exp(-beta |dI/dx|) + |d^k O / dy^k| exp(-beta |dI/dy|),
/// forward differences, image gradient = channel-mean absolute difference.
/// Positions where the difference stencil leaves the grid contribute zero;
/// the divisor stays H*W*C.
double loss_smoothness(const ChannelView& o, const Image& i1, int order,
                       double beta);

/// lambda_st * smooth1(Log T) + lambda_sd * smooth1(D1) + lambda_sf * smooth2(F12).
double loss_smoothness_total(const MotionEstimate& est, const DepthMap& d1,
                             const Image& i1, const LossWeights& weights);

/// Mean over H*W of mask * |Log T(x) - Log T_ego|_1 (L1 over the 6 twist
/// components).
double loss_motion_consistency(const MotionEstimate& est);

/// Mean over H*W of (1 - M) / (gamma + M).
double loss_mask_regularization(const SoftMask& mask, double gamma);

/// Outlier gate from the estimate's ego-flow photometric residuals:
/// inliers lie between the p_lo and p_hi error quantiles.
BinaryMask ego_outlier_mask(const SceneFrame& frame, const MotionEstimate& est,
                            const LossMasks& masks, double alpha);

/// Stereo anchoring: pe(I1, right warped by (-disparity(D1), 0)), averaged
/// over pixels with a valid warp. Throws when the frame has no right view.
double loss_spatial_photometric(const SceneFrame& frame, double alpha);

struct IterationLosses {
  double l_p = 0, l_p_ego = 0, l_g = 0, l_s = 0, l_c = 0, l_m = 0;
  double weight = 1.0;  ///< zeta^(N-i)
};

struct LossBreakdown {
  std::vector<IterationLosses> iterations;
  double l_d = 0;
  double total = 0;
};

/// total = L_d + sum_i zeta^(N-i) (L_p + L_p_ego + lambda_g L_g
///         + lambda_s L_s + lambda_c L_c + lambda_m L_m).
/// L_d is evaluated once (it does not depend on the motion estimates) and
/// only when the frame carries a right view.
LossBreakdown loss_total(const SceneFrame& frame,
                         const std::vector<MotionEstimate>& estimates,
                         const LossMasks& masks, const LossWeights& weights);

}  // namespace rigidflow
