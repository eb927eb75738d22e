#include "helixstab/helix.hpp"

#include <cmath>

#include "helixstab/frames.hpp"

namespace helixstab {

Mat3X helix_centerline(const HelixPoint& p, Real length, int n) {
  Mat3X nodes(3, n + 1);
  if (p.kappa < 1e-9) {
    // Same arithmetic as the rest-state constructor, so the degenerate
    // helix reproduces it bit-exactly.
    const Real dl = length / n;
    for (int i = 0; i <= n; ++i) nodes.col(i) = Vec3(0, 0, i * dl);
    return nodes;
  }
  const Real kappa = p.kappa / length;
  const Real tau = p.tau / length;
  const Real w2 = kappa * kappa + tau * tau;
  const Real w = std::sqrt(w2);
  const Real radius = kappa / w2;
  const Real pitch_rate = tau / w2;

  // Axis frame chosen so the curve starts at the origin with tangent +z and
  // principal normal -x.
  const Vec3 e1(1, 0, 0);
  const Vec3 e2 = Vec3(0, tau / w, kappa / w);
  const Vec3 e3 = Vec3(0, -kappa / w, tau / w);

  for (int i = 0; i <= n; ++i) {
    const Real s = length * i / n;
    nodes.col(i) = radius * (std::cos(w * s) - 1.0) * e1 +
                   radius * std::sin(w * s) * e2 + pitch_rate * w * s * e3;
  }
  return nodes;
}

BoundaryPose helix_clamp(const HelixPoint& p, const MaterialParams& params,
                         int n) {
  const Mat3X nodes = helix_centerline(p, params.length, n);

  // Chord tangents of the predicted discrete helix.
  Mat3X chords(3, n);
  for (int i = 0; i < n; ++i)
    chords.col(i) = (nodes.col(i + 1) - nodes.col(i)).normalized();

  // Fixed-end director: rest-frame d1 carried onto the first chord.
  Vec3 d = parallel_transport<Real>(Vec3(-1, 0, 0), Vec3(0, 0, 1),
                                    Vec3(chords.col(0)));
  d -= d.dot(chords.col(0)) * chords.col(0);
  d.normalize();

  BoundaryPose bc;
  bc.start.position = nodes.col(0);
  bc.start.tangent = chords.col(0);
  bc.start.director = d;
  bc.start.twist_angle = 0.0;

  // Zero-twist intermediate frame: sequential parallel transport along the
  // helix chords.
  for (int i = 1; i < n; ++i) {
    d = parallel_transport<Real>(d, Vec3(chords.col(i - 1)),
                                 Vec3(chords.col(i)));
    d -= d.dot(chords.col(i)) * chords.col(i);
    d.normalize();
  }

  const Real rotation = p.omega / params.stiffness_ratio();  // omega * (1+nu)
  bc.finish.position = nodes.col(n);
  bc.finish.tangent = chords.col(n - 1);
  bc.finish.director =
      rotate_about_axis<Real>(d, Vec3(chords.col(n - 1)), rotation);
  bc.finish.twist_angle = rotation;
  return bc;
}

BoundarySpec boundary_spec_for(const HelixPoint& p,
                               const MaterialParams& params, int n) {
  return BoundarySpec::fixed(helix_clamp(p, params, n));
}

Real helix_error(const RodState& state, const HelixPoint& p) {
  const int n = state.num_edges();
  const Real length = state.rest_edge_len.sum();
  const Mat3X predicted = helix_centerline(p, length, n);

  Real factor;
  if (p.kappa < 1e-6) {
    factor = 1.0 / length;
  } else {
    const Real kappa = p.kappa / length;
    const Real tau = p.tau / length;
    factor = (kappa * kappa + tau * tau) / kappa;  // 1 / helix radius
  }

  Real sum = 0.0;
  for (int i = 0; i <= n; ++i)
    sum += (state.nodes.col(i) - predicted.col(i)).norm();
  return factor * sum / (n + 1);
}

}  // namespace helixstab
