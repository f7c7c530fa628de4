// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/lie_se3.hpp"

#include <cmath>

namespace rigidflow {

RigidTransform::RigidTransform(const Eigen::Quaterniond& q, const Vector3& t)
    : q_(q), t_(t) {
  if (!q_.coeffs().allFinite() || !t_.allFinite()) {
    throw InvalidInput("RigidTransform: non-finite rotation or translation");
  }
  const double norm = q_.norm();
  if (norm < 1e-12) {
    throw InvalidInput("RigidTransform: zero-norm quaternion");
  }
  q_.coeffs() /= norm;
}

RigidTransform RigidTransform::from_rotation_matrix(const Matrix3& r,
                                                    const Vector3& t) {
  if (!r.allFinite() || !t.allFinite()) {
    throw InvalidInput("RigidTransform: non-finite rotation matrix");
  }
  return RigidTransform(Eigen::Quaterniond(r), t);
}

double RigidTransform::rotation_angle() const {
  const double n = q_.vec().norm();
  const double w = std::abs(q_.w());
  return 2.0 * std::atan2(n, w);
}

Matrix3 skew(const Vector3& a) {
  Matrix3 s;
  // clang-format off
  s <<     0, -a.z(),  a.y(),
       a.z(),      0, -a.x(),
      -a.y(),  a.x(),      0;
  // clang-format on
  return s;
}

RigidTransform exp(const Twist& xi) {
  if (!xi.all_finite()) {
    throw InvalidInput("exp: non-finite twist");
  }
  const double theta2 = xi.w.squaredNorm();
  const double theta = std::sqrt(theta2);

  // Unit quaternion [cos(theta/2); sin(theta/2) * axis].
  double qw;
  double k;  // sin(theta/2) / theta
  if (theta < kSmallAngle) {
    qw = 1.0 - theta2 / 8.0;
    k = 0.5 - theta2 / 48.0;
  } else {
    qw = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  const Eigen::Quaterniond q(qw, k * xi.w.x(), k * xi.w.y(), k * xi.w.z());

  // Left Jacobian V = I + b*[w]x + c*[w]x^2 maps v to the translation.
  // b = (1 - cos theta) / theta^2 = 2 (sin(theta/2)/theta)^2 = 2 k^2; the
  // half-angle form avoids the 1 - cos cancellation near zero.
  const double b = 2.0 * k * k;
  double c;  // (theta - sin theta) / theta^3
  if (theta < kSmallAngle) {
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Matrix3 w_hat = skew(xi.w);
  const Matrix3 v_mat = Matrix3::Identity() + b * w_hat + c * w_hat * w_hat;

  return RigidTransform(q, v_mat * xi.v);
}

Twist log(const RigidTransform& t) {
  Eigen::Quaterniond q = t.rotation();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical hemisphere

  const double n = q.vec().norm();  // sin(theta/2), theta in [0, pi]
  const double theta = 2.0 * std::atan2(n, q.w());
  if (theta > M_PI - kPiMargin) {
    throw NearSingular("log: rotation angle within epsilon of pi");
  }

  Vector3 w;
  if (n < kSmallAngle) {
    // theta / sin(theta/2) = 2 + n^2/3 + O(n^4)
    w = (2.0 + n * n / 3.0) * q.vec();
  } else {
    w = (theta / n) * q.vec();
  }

  // V^-1 = I - 1/2 [w]x + c * [w]x^2 with c = (1 - (theta/2)cot(theta/2)) /
  // theta^2. Using sin(theta/2) = n and cos(theta/2) = q.w() keeps the
  // subtraction benign; the naive sin/(1 - cos) form loses ~eps/theta^2
  // absolute accuracy in the recovered translation for small angles.
  const double theta2 = theta * theta;
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    c = (1.0 - 0.5 * theta * q.w() / n) / theta2;
  }
  const Matrix3 w_hat = skew(w);
  const Matrix3 v_inv =
      Matrix3::Identity() - 0.5 * w_hat + c * w_hat * w_hat;

  return Twist(v_inv * t.translation(), w);
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  // The constructor renormalizes the quaternion product.
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation());
}

RigidTransform inverse(const RigidTransform& t) {
  const Eigen::Quaterniond qi = t.rotation().conjugate();
  return RigidTransform(qi, -(qi * t.translation()));
}

Vector3 act(const RigidTransform& t, const Vector3& p) {
  return t.rotation() * p + t.translation();
}

}  // namespace rigidflow
