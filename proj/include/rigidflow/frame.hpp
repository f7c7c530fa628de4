// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "rigidflow/camera.hpp"
#include "rigidflow/image.hpp"

namespace rigidflow {

/// Everything observed for one temporal frame pair. The crop-size fields
/// are mandatory; the *_full fields enable full-image view synthesis, where
/// warps read the uncropped sources while losses stay on the crop.
struct SceneFrame {
  Image i1;  ///< reference image, crop size
  Image i2;  ///< target image, crop size
  std::optional<Image> i2_full;

  DepthMap d1;  ///< reference depth
  DepthMap d2;  ///< target depth
  std::optional<DepthMap> d2_full;

  PinholeCamera camera;  ///< crop intrinsics
  std::optional<CropWindow> window;

  std::optional<Image> right;  ///< stereo right view of frame 1, crop size

  int height() const { return i1.height(); }
  int width() const { return i1.width(); }

  void require_consistent() const {
    const int h = height();
    const int w = width();
    require_same_shape(h, w, i2.height(), i2.width(), "i1 vs i2");
    require_same_shape(h, w, d1.height(), d1.width(), "i1 vs d1");
    require_same_shape(h, w, d2.height(), d2.width(), "i1 vs d2");
    if (right) {
      require_same_shape(h, w, right->height(), right->width(), "i1 vs right");
    }
    if (i2_full) {
      if (!window) throw InvalidInput("frame: i2_full requires a crop window");
      window->require_inside(i2_full->height(), i2_full->width());
      if (window->width != w || window->height != h) {
        throw InvalidInput("frame: crop window size does not match images");
      }
    }
    if (d2_full) {
      if (!window) throw InvalidInput("frame: d2_full requires a crop window");
      window->require_inside(d2_full->height(), d2_full->width());
    }
    camera.require_valid();
  }
};

}  // namespace rigidflow
