// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/camera.hpp"

#include "rigidflow/parallel.hpp"

namespace rigidflow {
namespace {

// One pixel of the depth + motion to (u, v, dD) conversion. Shared by
// synthesize_scene_flow, scene_flow_3d, and rigid_flow so that the three
// agree bit for bit. Returns false when the moved point lands behind the
// camera.
inline bool move_pixel(const PinholeCamera& cam, double x, double y, double d,
                       const RigidTransform& t, Vector3* p_out,
                       Vector3* q_out) {
  const Vector3 p((x - cam.cx) / cam.fx * d, (y - cam.cy) / cam.fy * d, d);
  const Vector3 q = act(t, p);
  *p_out = p;
  *q_out = q;
  return q.z() > kMinDepth;
}

}  // namespace

Eigen::Vector2d project(const PinholeCamera& cam, const Vector3& p) {
  cam.require_valid();
  if (!(p.z() > kMinDepth)) {
    throw NearSingular("project: point at or behind the camera plane");
  }
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

Vector3 backproject(const PinholeCamera& cam, const Eigen::Vector2d& pixel,
                    double depth) {
  cam.require_valid();
  if (!(depth > 0) || !is_finite(depth)) {
    throw InvalidInput("backproject: depth must be positive and finite");
  }
  return {(pixel.x() - cam.cx) / cam.fx * depth,
          (pixel.y() - cam.cy) / cam.fy * depth, depth};
}

double depth_from_disparity(const PinholeCamera& cam, double disparity) {
  cam.require_valid();
  if (!(cam.baseline > 0)) {
    throw InvalidInput("depth_from_disparity: camera has no baseline");
  }
  if (!(disparity > 0) || !is_finite(disparity)) {
    throw InvalidInput("depth_from_disparity: disparity must be positive");
  }
  return cam.fx * cam.baseline / disparity;
}

double disparity_from_depth(const PinholeCamera& cam, double depth) {
  cam.require_valid();
  if (!(cam.baseline > 0)) {
    throw InvalidInput("disparity_from_depth: camera has no baseline");
  }
  if (!(depth > 0) || !is_finite(depth)) {
    throw InvalidInput("disparity_from_depth: depth must be positive");
  }
  return cam.fx * cam.baseline / depth;
}

SceneFlowUVD synthesize_scene_flow(const DepthMap& d1, const SE3Field& field,
                                   const PinholeCamera& cam) {
  cam.require_valid();
  const int h = d1.height();
  const int w = d1.width();
  require_same_shape(h, w, field.transforms.height(), field.transforms.width(),
                     "depth vs motion field");
  SceneFlowUVD out(h, w);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!d1.valid(y, x) || !field.valid(y, x)) continue;
      const double d = d1.values(y, x);
      if (!(d > 0) || !is_finite(d)) continue;
      Vector3 p, q;
      if (!move_pixel(cam, x, y, d, field.transforms(y, x), &p, &q)) continue;
      out.uv(y, x) = {cam.fx * q.x() / q.z() + cam.cx - x,
                      cam.fy * q.y() / q.z() + cam.cy - y};
      out.delta_d(y, x) = q.z() - d;
      out.valid(y, x) = 1;
    }
  });
  return out;
}

SceneFlow3D scene_flow_3d(const DepthMap& d1, const SE3Field& field,
                          const PinholeCamera& cam) {
  cam.require_valid();
  const int h = d1.height();
  const int w = d1.width();
  require_same_shape(h, w, field.transforms.height(), field.transforms.width(),
                     "depth vs motion field");
  SceneFlow3D out{Grid<Vector3>(h, w, Vector3::Zero()), BinaryMask(h, w, 0)};
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!d1.valid(y, x) || !field.valid(y, x)) continue;
      const double d = d1.values(y, x);
      if (!(d > 0) || !is_finite(d)) continue;
      Vector3 p, q;
      // 3D displacement stays defined behind the camera plane; only the
      // projection does not.
      move_pixel(cam, x, y, d, field.transforms(y, x), &p, &q);
      out.values(y, x) = q - p;
      out.valid(y, x) = 1;
    }
  });
  return out;
}

FlowField rigid_flow(const DepthMap& d1, const RigidTransform& t_ego,
                     const PinholeCamera& cam) {
  const SE3Field field = field_from_constant(t_ego, d1.height(), d1.width());
  const SceneFlowUVD sf = synthesize_scene_flow(d1, field, cam);
  return sf.flow();
}

}  // namespace rigidflow
