#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

namespace pdg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rigid motion x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Composition: (*this * rhs).apply(p) == apply(rhs.apply(p)).
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RigidTransform inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Eigen::Matrix4d homogeneous() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Orthonormal with determinant +1 to within `tol`.
  bool is_rigid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

/// Right-handed rotation by `angle` radians about the unit vector `axis`.
Mat3 rodrigues(const Vec3& axis, double angle);

}  // namespace pdg
