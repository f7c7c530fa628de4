// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Direct minimization of the total loss over a blockwise twist field,
// per-block mask logits, and an optional global depth log-scale. The
// objective is the iteration-decayed total over a ring buffer holding the
// last N accepted iterates (pre-filled with the initial point), so the
// recorded loss history is strictly decreasing by construction.
//
// Gradients are hybrid: analytic through the ego-motion aggregation and
// the mask/motion-consistency terms, central finite differences through
// everything that involves warping.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rigidflow/losses.hpp"

namespace rigidflow {

/// Desk-scale stand-in for per-pixel network outputs: one twist and one
/// mask logit per B x B block, plus a global depth log-scale correction.
struct BlockParams {
  int block = 8;
  Grid<Twist> twists;   ///< ceil(H/B) x ceil(W/B)
  Grid<double> logits;  ///< mask = logistic(logit)
  double depth_log_scale = 0.0;

  /// Zero twists, zero logits (mask 0.5), zero scale correction.
  static BlockParams init(int image_height, int image_width, int block);

  int parameter_count() const {
    return static_cast<int>(twists.size()) * 6 +
           static_cast<int>(logits.size()) + 1;
  }
};

/// Block-averaged projection of a per-pixel field and mask; handy as a
/// near-truth initialization in tests and experiments.
BlockParams block_params_from_field(const SE3Field& field,
                                    const SoftMask& mask, int block);

struct OptimizerConfig {
  int max_steps = 100;
  double step_size = 1e-2;        ///< initial line-search step
  double backtrack_factor = 0.5;
  int max_backtracks = 16;
  double tolerance = 1e-10;       ///< required decrease per accepted step
  int n_iters = 12;               ///< snapshot ring size
  bool detach_depth = true;       ///< scale gradient from final snapshot + stereo term only
  bool optimize_depth_scale = false;
  double fd_step = 1e-5;          ///< central-difference step

  void require_valid() const;
};

/// Bilinear upsampling (block centers to pixel centers) of the twist
/// components and logits, then exp / logistic per pixel.
std::pair<SE3Field, SoftMask> upsample_params(const BlockParams& params,
                                              int height, int width);

struct StepRecord {
  int step = 0;
  double total = 0;
  double l_p = 0, l_p_ego = 0, l_g = 0, l_s = 0, l_c = 0, l_m = 0, l_d = 0;
  double step_size = 0;
};

/// CSV rendering of the per-step loss log, including the header line
/// step,total,L_p,L_p_ego,L_g,L_s,L_c,L_m,L_d,step_size.
std::string history_to_csv(const std::vector<StepRecord>& history);

enum class RefineStatus {
  kStationary,  ///< backtracking found no decrease beyond tolerance
  kStepBudget,  ///< max_steps accepted steps taken
};

struct RefineResult {
  BlockParams params;
  std::vector<StepRecord> history;  ///< entry 0 is the initial point
  MotionEstimate estimate;
  RefineStatus status = RefineStatus::kStationary;
  int accepted_steps = 0;
};

/// Gradient descent with backtracking line search on the ring-buffer
/// objective. masks.m_ol, when absent, is computed once from the initial
/// iterate's ego-flow residuals and then held fixed. Throws NumericFailure
/// when the loss is not finite at the initial point.
RefineResult refine(const SceneFrame& frame, const BlockParams& init,
                    const LossMasks& masks, const LossWeights& weights,
                    const OptimizerConfig& cfg);

/// Central-difference gradient of an arbitrary scalar function, used to
/// cross-check the analytic paths. Throws NumericFailure on non-finite
/// evaluations.
std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& at, double h);

}  // namespace rigidflow
