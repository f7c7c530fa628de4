// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON document covering loss weights, optimizer
// settings, evaluation thresholds, and the outlier-gate quantiles. Every
// field has a default, so the empty document {} is a complete config.
// Unknown keys are rejected to catch typos early.

#pragma once

#include <string>
#include <vector>

#include "rigidflow/evaluation.hpp"
#include "rigidflow/losses.hpp"
#include "rigidflow/refine.hpp"

namespace rigidflow {

struct EvalConfig {
  double outlier_abs_px = kOutlierAbsPx;
  double outlier_rel = kOutlierRel;
  double depth_cap = kDepthCap;
  double depth_min = kDepthMin;
  bool median_scaling = false;
  std::vector<double> odometry_lengths = default_odometry_lengths();
};

struct RunConfig {
  int schema_version = 1;
  LossWeights weights;
  OptimizerConfig optimizer;
  EvalConfig eval;
  double outlier_p_lo = 0.05;  ///< photometric outlier-gate quantiles
  double outlier_p_hi = 0.80;

  void require_valid() const;
};

/// Parses a config document; missing keys keep their defaults, unknown
/// keys throw ParseError.
RunConfig run_config_from_json(const std::string& text);

std::string run_config_to_json(const RunConfig& cfg);

/// Reads and parses path; an empty path yields the default config.
RunConfig load_run_config(const std::string& path);

}  // namespace rigidflow
