// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <algorithm>

#include "rigidflow/grid.hpp"

namespace rigidflow {

/// H x W RGB image, channel values in [0,1].
using Image = Grid<Eigen::Vector3d>;

/// Clamps every channel to [0,1] in place. Loaders call this so downstream
/// code may assume the invariant.
inline void clamp01(Image* img) {
  for (int y = 0; y < img->height(); ++y) {
    for (int x = 0; x < img->width(); ++x) {
      Eigen::Vector3d& p = (*img)(y, x);
      for (int c = 0; c < 3; ++c) p[c] = std::clamp(p[c], 0.0, 1.0);
    }
  }
}

inline Image constant_image(int height, int width, double value) {
  return Image(height, width, Eigen::Vector3d::Constant(value));
}

/// Rectangular window into a full-resolution image, in full-image pixels.
struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  void require_inside(int full_height, int full_width) const {
    if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 ||
        x0 + width > full_width || y0 + height > full_height) {
      throw InvalidInput("crop window does not fit inside the full image");
    }
  }
};

}  // namespace rigidflow
