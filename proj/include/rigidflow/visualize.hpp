// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic renderings for inspection: flow as the standard optical
// flow color wheel (zero motion is white), depth through a perceptual
// colormap, masks as grayscale, and error maps as a heat ramp with
// outliers in solid red.

#pragma once

#include <optional>

#include "rigidflow/camera.hpp"
#include "rigidflow/image.hpp"

namespace rigidflow {

/// Color-wheel flow rendering. Hue encodes direction, saturation encodes
/// magnitude relative to max_magnitude (defaults to the field's maximum).
/// Invalid pixels are black.
Image visualize_flow(const FlowField& flow,
                     std::optional<double> max_magnitude = std::nullopt);

/// Perceptual-colormap depth rendering, normalized to the valid range.
/// Invalid pixels are black.
Image visualize_depth(const DepthMap& depth);

/// Grayscale mask rendering; accepts values in [0,1].
Image visualize_mask(const Grid<double>& mask);

/// Heat ramp over error magnitudes; values above threshold render solid
/// red. Invalid pixels are black.
Image visualize_error(const Grid<double>& error, const BinaryMask& valid,
                      double threshold = 3.0);

}  // namespace rigidflow
