// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural scene generator: textured planes raycast analytically into
// images, depths, per-pixel SE3 motion, flows, occlusion and rigidity
// ground truth. Deterministic given the seed, bit for bit.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidflow/frame.hpp"
#include "rigidflow/motion_field.hpp"

namespace rigidflow {

struct TextureSpec {
  enum class Kind { kNoise, kChecker };
  Kind kind = Kind::kNoise;
  double scale = 1.0;  ///< lattice cell / checker square size, meters
  std::uint64_t seed_offset = 0;
  double base = 0.5;       ///< noise: center value
  double amplitude = 0.3;  ///< noise: half range
  Eigen::Vector3d color_a = {0.2, 0.2, 0.2};  ///< checker only
  Eigen::Vector3d color_b = {0.8, 0.8, 0.8};
};

/// Bounded planar rectangle with its own world motion between frames.
struct PatchSpec {
  Vector3 center = {0, 0, 5};
  Vector3 axis_u = {1, 0, 0};  ///< in-plane axes, orthonormalized on use
  Vector3 axis_v = {0, 1, 0};
  double half_u = 1.0;  ///< half extent along axis_u, meters
  double half_v = 1.0;
  RigidTransform motion;  ///< world-frame motion, identity = static
  TextureSpec texture;
};

/// Unbounded background plane n . p = distance.
struct BackgroundSpec {
  Vector3 normal = {0, 0, 1};
  double distance = 10.0;
  TextureSpec texture;
};

struct SceneSpec {
  int full_width = 80;
  int full_height = 60;
  CropWindow crop{8, 6, 64, 48};
  PinholeCamera camera{70.0, 70.0, 40.0, 30.0, 0.54};  ///< full-image intrinsics
  RigidTransform ego_motion;  ///< frame-1 camera coords to frame-2 camera coords
  BackgroundSpec background;
  std::vector<PatchSpec> objects;
  std::uint64_t seed = 1;
};

/// Everything the losses and metrics can be checked against. World frame
/// coincides with the frame-1 camera. Occlusion is visibility against the
/// FULL image, so a correspondence that leaves the crop but stays inside
/// the full frame still counts as non-occluded.
struct GroundTruth {
  Image i1, i2, right;                 // crop size
  Image i1_full, i2_full, right_full;  // full size
  DepthMap d1, d2, d1_full, d2_full;
  SE3Field field;       ///< per-pixel frame-1 to frame-2 motion, crop
  BinaryMask rigidity;  ///< 1 on static pixels, crop
  FlowField f12, f21, f12_full, f21_full;
  BinaryMask occlusion, occlusion_full;  ///< 1 = non-occluded
  RigidTransform t_ego;
  PinholeCamera camera;       ///< crop intrinsics
  PinholeCamera camera_full;  ///< full intrinsics
  CropWindow window;
  bool has_stereo = false;
};

GroundTruth render(const SceneSpec& spec);

/// Assembles the loss input frame from ground truth. With use_full, the
/// uncropped target image/depth and the window are attached so warping can
/// recover content that leaves the crop.
SceneFrame make_frame(const GroundTruth& gt, bool use_full);

enum class PerturbKind { kTwistNoise, kMaskFlip, kDepthScale };

PerturbKind perturb_kind_from_string(const std::string& name);

/// Estimate inputs derived from ground truth with controlled wrongness.
struct PerturbedEstimate {
  SE3Field field;
  SoftMask mask;
  DepthMap d1;
};

/// kTwistNoise: left-multiplies every pixel transform by exp of N(0, mag^2)
/// component noise. kMaskFlip: flips mask entries with probability mag.
/// kDepthScale: multiplies depths by (1 + mag). Magnitude 0 is a no-op.
PerturbedEstimate perturb(const GroundTruth& gt, PerturbKind kind,
                          double magnitude, std::uint64_t seed);

SceneSpec scene_spec_from_json(const std::string& text);
std::string scene_spec_to_json(const SceneSpec& spec);

}  // namespace rigidflow
