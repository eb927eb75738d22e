// Test-only oracles, independent of the library's analytic derivative paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace oracles {

using Real = double;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Central-difference gradient of a scalar function.
inline VecX fd_gradient(const std::function<Real(const VecX&)>& f,
                        const VecX& q, Real h) {
  VecX g(q.size());
  VecX qp = q;
  for (int j = 0; j < q.size(); ++j) {
    qp(j) = q(j) + h;
    const Real fp = f(qp);
    qp(j) = q(j) - h;
    const Real fm = f(qp);
    qp(j) = q(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Central-difference Jacobian of a vector function (column j = d f / d q_j).
inline MatX fd_jacobian(const std::function<VecX(const VecX&)>& f,
                        const VecX& q, Real h) {
  const VecX f0 = f(q);
  MatX jac(f0.size(), q.size());
  VecX qp = q;
  for (int j = 0; j < q.size(); ++j) {
    qp(j) = q(j) + h;
    const VecX fp = f(qp);
    qp(j) = q(j) - h;
    const VecX fm = f(qp);
    qp(j) = q(j);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// Rodrigues rotation matrix about a unit axis.
inline Mat3 rotation_matrix(const Vec3& axis, Real angle) {
  Mat3 k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

// Frenet-Serret integration with constant curvature/torsion by RK4 on the
// state (p, t, n, b). Returns positions at arc-length samples 0..L step L/n.
inline Eigen::Matrix3Xd integrate_frenet(Real kappa, Real tau, Real length,
                                         int n, const Vec3& p0, const Vec3& t0,
                                         const Vec3& n0) {
  const int substeps = 64;  // per output segment
  Eigen::Matrix<Real, 12, 1> y;
  const Vec3 b0 = t0.cross(n0);
  y << p0, t0, n0, b0;

  auto rhs = [&](const Eigen::Matrix<Real, 12, 1>& s) {
    Eigen::Matrix<Real, 12, 1> d;
    const Vec3 t = s.segment<3>(3), nn = s.segment<3>(6), b = s.segment<3>(9);
    d.segment<3>(0) = t;
    d.segment<3>(3) = kappa * nn;
    d.segment<3>(6) = -kappa * t + tau * b;
    d.segment<3>(9) = -tau * nn;
    return d;
  };

  Eigen::Matrix3Xd out(3, n + 1);
  out.col(0) = p0;
  const Real h = length / n / substeps;
  for (int seg = 0; seg < n; ++seg) {
    for (int s = 0; s < substeps; ++s) {
      const auto k1 = rhs(y);
      const auto k2 = rhs(y + 0.5 * h * k1);
      const auto k3 = rhs(y + 0.5 * h * k2);
      const auto k4 = rhs(y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.col(seg + 1) = y.segment<3>(0);
  }
  return out;
}

// Deterministic PRNG (splitmix64), independent of the standard library's
// distribution implementations.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [-1, 1)
  Real sym() { return 2.0 * (next() >> 11) * 0x1.0p-53 - 1.0; }
  // uniform in [0, 1)
  Real uni() { return (next() >> 11) * 0x1.0p-53; }
  Vec3 vec() { return Vec3(sym(), sym(), sym()); }
};

}  // namespace oracles
