// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pinhole camera model and the conversion from depth + SE3 motion into the
// (u, v, dD) scene-flow representation, 3D scene flow, optical flow, and
// rigid flow.

#pragma once

#include "rigidflow/grid.hpp"
#include "rigidflow/lie_se3.hpp"
#include "rigidflow/motion_field.hpp"

namespace rigidflow {

/// Minimum z (meters) in front of the camera for projection.
inline constexpr double kMinDepth = 1e-6;

struct PinholeCamera {
  double fx = 0;        ///< focal length, pixels
  double fy = 0;        ///< focal length, pixels
  double cx = 0;        ///< principal point, pixels
  double cy = 0;        ///< principal point, pixels
  double baseline = 0;  ///< stereo baseline, meters (0 = unknown)

  void require_valid() const {
    if (!(fx > 0) || !(fy > 0) || !is_finite(cx) || !is_finite(cy)) {
      throw InvalidInput("camera: focal lengths must be positive and finite");
    }
  }

  /// Intrinsics of a crop whose origin sits at (x0, y0) in this camera's
  /// pixel grid.
  PinholeCamera cropped(int x0, int y0) const {
    PinholeCamera c = *this;
    c.cx -= x0;
    c.cy -= y0;
    return c;
  }
};

/// H x W depth grid (meters) with validity flags. Valid entries are
/// positive and finite.
struct DepthMap {
  Grid<double> values;
  BinaryMask valid;

  DepthMap() = default;
  DepthMap(int height, int width, double fill = 0.0)
      : values(height, width, fill), valid(height, width, fill > 0 ? 1 : 0) {}

  int height() const { return values.height(); }
  int width() const { return values.width(); }
};

/// Per-pixel 2D flow (pixels) with validity flags.
struct FlowField {
  Grid<Eigen::Vector2d> values;
  BinaryMask valid;

  FlowField() = default;
  FlowField(int height, int width)
      : values(height, width, Eigen::Vector2d::Zero()),
        valid(height, width, 1) {}

  int height() const { return values.height(); }
  int width() const { return values.width(); }
};

/// Scene flow as (u, v, dD): optical flow in pixels plus the depth change
/// registered to frame 1 (meters). The transformed depth registered to
/// frame 1 is D1 + dD.
struct SceneFlowUVD {
  Grid<Eigen::Vector2d> uv;
  Grid<double> delta_d;
  BinaryMask valid;

  SceneFlowUVD() = default;
  SceneFlowUVD(int height, int width)
      : uv(height, width, Eigen::Vector2d::Zero()),
        delta_d(height, width, 0.0),
        valid(height, width, 0) {}

  int height() const { return uv.height(); }
  int width() const { return uv.width(); }

  /// The (u, v) part as a FlowField.
  FlowField flow() const {
    FlowField f(height(), width());
    f.values = uv;
    f.valid = valid;
    return f;
  }
};

/// Projects a camera-frame point to pixel coordinates.
/// Throws NearSingular if p.z() <= kMinDepth.
Eigen::Vector2d project(const PinholeCamera& cam, const Vector3& p);

/// Lifts a pixel at the given depth back to a camera-frame point.
Vector3 backproject(const PinholeCamera& cam, const Eigen::Vector2d& pixel,
                    double depth);

/// d = fx * baseline / disparity. Throws InvalidInput on non-positive input
/// or missing baseline.
double depth_from_disparity(const PinholeCamera& cam, double disparity);

/// disparity = fx * baseline / depth.
double disparity_from_depth(const PinholeCamera& cam, double depth);

/// Converts depth + per-pixel SE3 motion into (u, v, dD): per pixel x with
/// depth d, p = backproject(x, d), p' = T(x) * p, (u, v) = project(p') - x,
/// dD = p'.z - d. Pixels whose transformed point falls behind the camera
/// (p'.z <= kMinDepth) are marked invalid rather than erroring; invalid
/// depth or field pixels propagate as invalid.
SceneFlowUVD synthesize_scene_flow(const DepthMap& d1, const SE3Field& field,
                                   const PinholeCamera& cam);

/// 3D scene flow S(x) = T(x) * p - p.
struct SceneFlow3D {
  Grid<Vector3> values;
  BinaryMask valid;
};

SceneFlow3D scene_flow_3d(const DepthMap& d1, const SE3Field& field,
                          const PinholeCamera& cam);

/// 2D rigid flow for a single transform applied everywhere: identical to
/// the (u, v) part of synthesize_scene_flow with a constant field.
FlowField rigid_flow(const DepthMap& d1, const RigidTransform& t_ego,
                     const PinholeCamera& cam);

}  // namespace rigidflow
