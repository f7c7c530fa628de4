// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact SE(3)/se(3) group and algebra operations. Everything downstream
// (motion fields, ego-motion aggregation, losses, evaluation) is built on
// these five functions: exp, log, compose, inverse, act.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "rigidflow/common.hpp"

namespace rigidflow {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;

/// se(3) element: translational part v (meters) and rotational part w
/// (axis-angle, radians). Canonical logarithms keep |w| <= pi.
struct Twist {
  Vector3 v = Vector3::Zero();
  Vector3 w = Vector3::Zero();

  Twist() = default;
  Twist(const Vector3& v_in, const Vector3& w_in) : v(v_in), w(w_in) {}

  static Twist zero() { return Twist(); }

  /// Packs as [v; w].
  Vector6 vector() const {
    Vector6 xi;
    xi << v, w;
    return xi;
  }

  static Twist from_vector(const Vector6& xi) {
    return Twist(xi.head<3>(), xi.tail<3>());
  }

  bool all_finite() const { return v.allFinite() && w.allFinite(); }

  Twist operator+(const Twist& o) const { return Twist(v + o.v, w + o.w); }
  Twist operator-(const Twist& o) const { return Twist(v - o.v, w - o.w); }
  Twist operator*(double s) const { return Twist(v * s, w * s); }
  Twist operator-() const { return Twist(-v, -w); }
};

inline Twist operator*(double s, const Twist& xi) { return xi * s; }

/// SE(3) element. Rotation is stored as a unit quaternion and renormalized
/// after every composition, which keeps orthonormality drift below 1e-9
/// over chains of thousands of compositions.
class RigidTransform {
 public:
  RigidTransform() : q_(Eigen::Quaterniond::Identity()), t_(Vector3::Zero()) {}

  RigidTransform(const Eigen::Quaterniond& q, const Vector3& t);

  static RigidTransform identity() { return RigidTransform(); }

  /// Builds from a 3x3 rotation matrix (orthonormalized via quaternion
  /// conversion) and a translation.
  static RigidTransform from_rotation_matrix(const Matrix3& r,
                                             const Vector3& t);

  /// Builds from the top three rows of a homogeneous 4x4 (or 3x4) matrix.
  static RigidTransform from_matrix(const Matrix4& m) {
    return from_rotation_matrix(m.topLeftCorner<3, 3>(),
                                m.topRightCorner<3, 1>());
  }

  const Eigen::Quaterniond& rotation() const { return q_; }
  const Vector3& translation() const { return t_; }
  Matrix3 rotation_matrix() const { return q_.toRotationMatrix(); }

  Matrix4 matrix() const {
    Matrix4 m = Matrix4::Identity();
    m.topLeftCorner<3, 3>() = rotation_matrix();
    m.topRightCorner<3, 1>() = t_;
    return m;
  }

  /// Rotation angle in [0, pi].
  double rotation_angle() const;

 private:
  Eigen::Quaterniond q_;
  Vector3 t_;
};

/// Angle threshold below which Rodrigues/left-Jacobian coefficients switch
/// to their second-order Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;

/// Margin around pi inside which log() refuses to pick a branch.
inline constexpr double kPiMargin = 1e-6;

/// Skew-symmetric matrix such that skew(a) * b = a x b.
Matrix3 skew(const Vector3& a);

/// Closed-form exponential map se(3) -> SE(3): Rodrigues rotation plus the
/// SO(3) left Jacobian applied to the translational part.
/// Throws InvalidInput on non-finite input.
RigidTransform exp(const Twist& xi);

/// Closed-form logarithm SE(3) -> se(3), canonical branch |w| <= pi.
/// Throws NearSingular when the rotation angle is within kPiMargin of pi.
Twist log(const RigidTransform& t);

/// Group composition a * b (apply b first, then a).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Group inverse.
RigidTransform inverse(const RigidTransform& t);

/// Group action on a 3D point.
Vector3 act(const RigidTransform& t, const Vector3& p);

}  // namespace rigidflow
