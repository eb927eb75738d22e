#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "helixstab/errors.hpp"

namespace helixstab {

// Frame kernels are templated on the scalar so they compose with any
// Eigen-compatible numeric type.

// Minimal rotation carrying t_from onto t_to, applied to v. Both tangents
// must be unit vectors. For nearly parallel tangents the map degenerates to
// the identity; anti-parallel tangents leave the rotation axis undefined and
// are rejected.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> parallel_transport(
    const Eigen::Matrix<Scalar, 3, 1>& v,
    const Eigen::Matrix<Scalar, 3, 1>& t_from,
    const Eigen::Matrix<Scalar, 3, 1>& t_to) {
  Eigen::Matrix<Scalar, 3, 1> axis = t_from.cross(t_to);
  const Scalar sin_norm = axis.norm();
  const Scalar cos_angle = t_from.dot(t_to);
  if (sin_norm < Scalar(1e-12)) {
    if (cos_angle < Scalar(0))
      throw DegenerateGeometry("parallel_transport: anti-parallel tangents");
    return v;
  }
  axis /= sin_norm;
  // Rodrigues with cos/sin taken from the tangent pair directly.
  return v * cos_angle + axis.cross(v) * sin_norm +
         axis * (axis.dot(v)) * (Scalar(1) - cos_angle);
}

// Rotation of v about the unit axis by the given angle.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> rotate_about_axis(
    const Eigen::Matrix<Scalar, 3, 1>& v,
    const Eigen::Matrix<Scalar, 3, 1>& axis, Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  return v * c + axis.cross(v) * s + axis * (axis.dot(v)) * (Scalar(1) - c);
}

// Signed angle from a to b about the unit axis, in (-pi, pi]. a and b are
// assumed perpendicular to the axis and of comparable magnitude.
template <typename Scalar>
Scalar signed_angle(const Eigen::Matrix<Scalar, 3, 1>& a,
                    const Eigen::Matrix<Scalar, 3, 1>& b,
                    const Eigen::Matrix<Scalar, 3, 1>& axis) {
  const Eigen::Matrix<Scalar, 3, 1> w = a.cross(b);
  return std::atan2(axis.dot(w), a.dot(b));
}

// Nearest representative of angle within pi of the reference (unwrapping).
template <typename Scalar>
Scalar unwrap_near(Scalar angle, Scalar reference) {
  const Scalar two_pi = Scalar(2) * Scalar(M_PI);
  return angle + two_pi * std::round((reference - angle) / two_pi);
}

}  // namespace helixstab
