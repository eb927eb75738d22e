#include <doctest.h>

#include <cmath>

#include "helixstab/frames.hpp"
#include "helixstab/helix.hpp"
#include "oracles.hpp"

using namespace helixstab;

TEST_CASE("degenerate helix is a straight line") {
  const Mat3X nodes = helix_centerline({0, 0, 0}, 1.0, 10);
  for (int i = 0; i <= 10; ++i)
    CHECK((nodes.col(i) - Vec3(0, 0, i / 10.0)).norm() < 1e-15);
}

TEST_CASE("twist-free full turn closes into a circle") {
  // kappa = 1 (1/m), L = 2*pi: nondimensional kappa = 2*pi.
  const Real length = 2.0 * M_PI;
  const Mat3X nodes = helix_centerline({2.0 * M_PI, 0, 0}, length, 128);
  CHECK((nodes.col(128) - nodes.col(0)).norm() < 1e-9);
}

TEST_CASE("helix geometry matches the Frenet integration oracle") {
  // kappa = 3, tau = 4 (1/m) on a unit-length rod.
  const int n = 50;
  const Mat3X nodes = helix_centerline({3, 4, 0}, 1.0, n);

  const Mat3X oracle = oracles::integrate_frenet(
      3.0, 4.0, 1.0, n, Vec3::Zero(), Vec3(0, 0, 1), Vec3(-1, 0, 0));
  for (int i = 0; i <= n; ++i)
    CHECK((nodes.col(i) - oracle.col(i)).norm() < 1e-8);

  // Radius a = kappa/(kappa^2+tau^2) and axial advance b*w*L.
  const Vec3 axis_dir = Vec3(0, -3.0 / 5.0, 4.0 / 5.0);  // e3 for kappa3 tau4
  const Vec3 axis_point = Vec3(-3.0 / 25.0, 0, 0);
  const Vec3 radial = nodes.col(n) - axis_point;
  const Real axial = radial.dot(axis_dir);
  const Real dist_from_axis = (radial - axial * axis_dir).norm();
  CHECK(dist_from_axis == doctest::Approx(3.0 / 25.0).epsilon(1e-10));
  CHECK(axial == doctest::Approx(4.0 / 5.0).epsilon(1e-10));
}

TEST_CASE("discrete curvature and torsion are constant along the interior") {
  const int n = 80;
  const Mat3X nodes = helix_centerline({5, 3, 0}, 1.0, n);
  VecX turning(n - 1);
  VecX dihedral(n - 2);
  Mat3X tangents(3, n);
  for (int i = 0; i < n; ++i)
    tangents.col(i) = (nodes.col(i + 1) - nodes.col(i)).normalized();
  for (int i = 1; i < n; ++i) {
    turning(i - 1) = std::acos(
        std::clamp(tangents.col(i - 1).dot(tangents.col(i)), -1.0, 1.0));
  }
  for (int i = 1; i < n - 1; ++i) {
    const Vec3 b0 = tangents.col(i - 1).cross(tangents.col(i)).normalized();
    const Vec3 b1 = tangents.col(i).cross(tangents.col(i + 1)).normalized();
    dihedral(i - 1) = std::acos(std::clamp(b0.dot(b1), -1.0, 1.0));
  }
  CHECK((turning.maxCoeff() - turning.minCoeff()) / turning.mean() < 1e-8);
  CHECK((dihedral.maxCoeff() - dihedral.minCoeff()) / dihedral.mean() < 1e-8);
}

TEST_CASE("rest clamp is reproduced exactly at the origin of the space") {
  MaterialParams params;
  const int n = 20;
  const BoundaryPose bc = helix_clamp({0, 0, 0}, params, n);
  const RodState rest = make_straight_rod(params, n);

  CHECK((bc.start.position - rest.nodes.col(0)).norm() == 0.0);
  CHECK((bc.finish.position - rest.nodes.col(n)).norm() == 0.0);
  CHECK((bc.start.tangent - Vec3(0, 0, 1)).norm() == 0.0);
  CHECK((bc.finish.tangent - Vec3(0, 0, 1)).norm() == 0.0);
  CHECK((bc.start.director - Vec3(-1, 0, 0)).norm() == 0.0);
  CHECK((bc.finish.director - Vec3(-1, 0, 0)).norm() == 0.0);
  CHECK(bc.finish.twist_angle == 0.0);
}

TEST_CASE("intermediate frame chain carries no reference twist") {
  MaterialParams params;
  const int n = 40;
  const HelixPoint p{4, 2, 0};
  const Mat3X nodes = helix_centerline(p, params.length, n);

  Mat3X chords(3, n);
  for (int i = 0; i < n; ++i)
    chords.col(i) = (nodes.col(i + 1) - nodes.col(i)).normalized();

  Vec3 d = parallel_transport<Real>(Vec3(-1, 0, 0), Vec3(0, 0, 1),
                                    Vec3(chords.col(0)));
  d.normalize();
  Vec3 prev = d;
  for (int i = 1; i < n; ++i) {
    const Vec3 transported = parallel_transport<Real>(
        prev, Vec3(chords.col(i - 1)), Vec3(chords.col(i)));
    // The chain is defined as its own transport: zero mismatch angle.
    const Real twist =
        signed_angle<Real>(transported, transported, Vec3(chords.col(i)));
    CHECK(std::abs(twist) < 1e-12);
    CHECK(std::abs(transported.norm() - 1.0) < 1e-9);
    CHECK(std::abs(transported.dot(chords.col(i))) < 1e-9);
    prev = transported.normalized();
  }

  // And the clamp director at omega = 0 equals the chain end.
  const BoundaryPose bc = helix_clamp(p, params, n);
  CHECK((bc.finish.director - prev).norm() < 1e-9);
}

TEST_CASE("twisting moment rotates the end director by omega/c") {
  MaterialParams params;
  params.poisson_ratio = 0.33;
  const int n = 30;
  const HelixPoint base{2, 1, 0};
  const HelixPoint twisted{2, 1, 0.5};
  const BoundaryPose b0 = helix_clamp(base, params, n);
  const BoundaryPose b1 = helix_clamp(twisted, params, n);

  const Real angle = signed_angle<Real>(b0.finish.director, b1.finish.director,
                                        b0.finish.tangent);
  CHECK(angle == doctest::Approx(0.5 * 1.33).epsilon(1e-12));
  CHECK(b1.finish.twist_angle == doctest::Approx(0.5 * 1.33).epsilon(1e-12));
}

TEST_CASE("helix error normalization") {
  MaterialParams params;
  const int n = 25;
  const HelixPoint p{3, 2, 0};
  RodState s = make_straight_rod(params, n);
  const Mat3X on_helix = helix_centerline(p, params.length, n);
  update_frames_and_twist(s, on_helix);
  CHECK(helix_error(s, p) == doctest::Approx(0.0).epsilon(1e-14));

  // Displacing every node by exactly one helix radius gives e = 1.
  const Real kappa = p.kappa / params.length;
  const Real tau = p.tau / params.length;
  const Real radius = kappa / (kappa * kappa + tau * tau);
  Mat3X displaced = on_helix;
  const Vec3 dir = Vec3(1, 2, -1).normalized();
  for (int i = 0; i <= n; ++i) displaced.col(i) += radius * dir;
  update_frames_and_twist(s, displaced);
  CHECK(helix_error(s, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("helix error matches an independent recomputation") {
  MaterialParams params;
  const int n = 18;
  const HelixPoint p{2.5, -1.5, 0.3};
  RodState s = make_straight_rod(params, n);
  Mat3X q = helix_centerline(p, params.length, n);
  oracles::Rng rng(11);
  for (int i = 0; i <= n; ++i) q.col(i) += 0.01 * rng.vec();
  update_frames_and_twist(s, q);

  const Mat3X predicted = helix_centerline(p, params.length, n);
  const Real kappa = p.kappa / params.length;
  const Real tau = p.tau / params.length;
  Real expected = 0.0;
  for (int i = 0; i <= n; ++i)
    expected += (q.col(i) - predicted.col(i)).norm();
  expected *= (kappa * kappa + tau * tau) / kappa / (n + 1);

  CHECK(helix_error(s, p) == doctest::Approx(expected).epsilon(1e-12));

  // Rigid motions applied to both the rod and the prediction cancel.
  const Mat3 rot = oracles::rotation_matrix(Vec3(1, 1, 1).normalized(), 0.7);
  Real rotated = 0.0;
  for (int i = 0; i <= n; ++i)
    rotated += (rot * q.col(i) - rot * predicted.col(i)).norm();
  rotated *= (kappa * kappa + tau * tau) / kappa / (n + 1);
  CHECK(rotated == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kappa = 0 error uses the 1/L normalization") {
  MaterialParams params;
  const int n = 12;
  RodState s = make_straight_rod(params, n);
  Mat3X q = s.nodes;
  for (int i = 0; i <= n; ++i) q.col(i) += Vec3(0.02, 0, 0);
  update_frames_and_twist(s, q);
  const Real e = helix_error(s, {0, 0, 1.0});
  CHECK(e == doctest::Approx(0.02 / params.length).epsilon(1e-12));
}

TEST_CASE("clamped edge lengths equal the undeformed edge length") {
  MaterialParams params;
  const int n = 40;
  const BoundaryPose bc = helix_clamp({6, 4, 1}, params, n);
  const Real rest = params.length / n;
  // The clamp places the inner nodes one rest edge length away along the
  // chord tangent, so the constraint holds by construction; verify the
  // realized geometry.
  const Vec3 q1 = bc.start.position + rest * bc.start.tangent;
  const Vec3 qm = bc.finish.position - rest * bc.finish.tangent;
  CHECK((q1 - bc.start.position).norm() == doctest::Approx(rest).epsilon(1e-12));
  CHECK((bc.finish.position - qm).norm() == doctest::Approx(rest).epsilon(1e-12));
}
