// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// View synthesis by bilinear warping (plain and full-image variants), SSIM,
// photometric error, the forward-backward occlusion mask, and the
// quantile-based photometric outlier mask.

#pragma once

#include <optional>

#include "rigidflow/camera.hpp"
#include "rigidflow/image.hpp"

namespace rigidflow {

/// Forward-backward consistency constants: non-occluded iff
/// |F12 + F21'|^2 < a1 * (|F12|^2 + |F21'|^2) + a2.
inline constexpr double kFbA1 = 0.01;
inline constexpr double kFbA2 = 0.5;

/// SSIM stabilizers for unit-range images.
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Fewer valid pixels than this makes outlier quantiles meaningless; the
/// mask degrades to all-inlier with a warning.
inline constexpr int kOutlierMinSupport = 16;

struct WarpedImage {
  Image values;
  BinaryMask valid;
};

struct WarpedScalar {
  Grid<double> values;
  BinaryMask valid;
};

/// Synthesizes the flow-target view: output(x) = source sampled bilinearly
/// at x + flow(x), or at x + origin + flow(x) when a window is given (the
/// source is then the full uncropped image and the output stays crop-size).
/// A pixel is valid iff its flow is valid and the sample point lies inside
/// [0, W-1] x [0, H-1] of the source; invalid pixels get value 0.
WarpedImage warp_bilinear(const Image& source, const FlowField& flow,
                          const std::optional<CropWindow>& window = {});

/// Depth variant. Validity additionally requires all four source taps valid.
WarpedScalar warp_bilinear(const DepthMap& source, const FlowField& flow,
                           const std::optional<CropWindow>& window = {});

/// Per-pixel SSIM in [-1, 1]: 3x3 box statistics with replicate padding,
/// computed per channel and channel-averaged. ssim(I, I) = 1 everywhere.
Grid<double> ssim(const Image& ia, const Image& ib);

/// pe = (alpha / 2) * (1 - SSIM) + (1 - alpha) * |Ia - Ib| with the L1 term
/// averaged over channels.
Grid<double> photometric_error(const Image& ia, const Image& ib, double alpha);

/// Non-occlusion mask from forward-backward flow consistency. A pixel is
/// non-occluded (1) iff its forward target is in bounds, both flows are
/// valid there, and the consistency inequality holds with (kFbA1, kFbA2).
BinaryMask occlusion_mask(const FlowField& f12, const FlowField& f21);

struct OutlierMaskResult {
  BinaryMask mask;        ///< 1 = inlier
  bool low_support = false;  ///< true when the degenerate all-inlier policy fired
};

/// Keeps pixels whose photometric error lies within [q_lo, q_hi], the p_lo
/// and p_hi quantiles over valid pixels. Quantile rule: ascending sort,
/// index min(floor(p * N), N - 1). Invalid pixels get 0.
OutlierMaskResult outlier_mask(const Grid<double>& pe_map,
                               const BinaryMask& valid, double p_lo = 0.05,
                               double p_hi = 0.80);

}  // namespace rigidflow
