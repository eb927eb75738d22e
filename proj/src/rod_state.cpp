#include "helixstab/rod_state.hpp"

#include "helixstab/frames.hpp"

namespace helixstab {

Vec3 RodState::material_d1(int i) const {
  return rotate_about_axis<Real>(ref_d1.col(i), tangents.col(i), thetas(i));
}

Vec3 RodState::material_d2(int i) const {
  return rotate_about_axis<Real>(ref_d2.col(i), tangents.col(i), thetas(i));
}

Real RodState::voronoi_length(int i) const {
  Real len = 0.0;
  if (i > 0) len += 0.5 * rest_edge_len(i - 1);
  if (i < num_edges()) len += 0.5 * rest_edge_len(i);
  return len;
}

VecX RodState::dof_vector() const {
  const int n = num_edges();
  VecX q(dof_count());
  for (int i = 0; i <= n; ++i) q.segment<3>(pos_index(i)) = nodes.col(i);
  for (int i = 0; i < n; ++i) q(theta_index(i)) = thetas(i);
  return q;
}

void RodState::set_from_dof_vector(const Eigen::Ref<const VecX>& q) {
  const int n = num_edges();
  Mat3X positions(3, n + 1);
  for (int i = 0; i <= n; ++i) positions.col(i) = q.segment<3>(pos_index(i));
  for (int i = 0; i < n; ++i) thetas(i) = q(theta_index(i));
  update_frames_and_twist(*this, positions);
}

RodState make_straight_rod(const MaterialParams& params, int n) {
  if (n < 3)
    throw InvalidDiscretization("rod needs at least 3 edges, got " +
                                std::to_string(n));
  params.validate();

  RodState s;
  s.nodes.resize(3, n + 1);
  const Real dl = params.length / n;
  for (int i = 0; i <= n; ++i) s.nodes.col(i) = Vec3(0, 0, i * dl);

  s.thetas = VecX::Zero(n);
  s.velocities = VecX::Zero(num_dof(n));
  s.tangents = Vec3(0, 0, 1).replicate(1, n);
  s.ref_d1 = Vec3(-1, 0, 0).replicate(1, n);
  s.ref_d2 = Vec3(0, -1, 0).replicate(1, n);
  s.ref_twist = VecX::Zero(n);
  // The undeformed configuration is the initial configuration; measuring the
  // rest lengths off the constructed nodes keeps the rest energies exactly 0.
  s.rest_edge_len.resize(n);
  for (int i = 0; i < n; ++i)
    s.rest_edge_len(i) = (s.nodes.col(i + 1) - s.nodes.col(i)).norm();
  s.rest_turning = VecX::Zero(n - 1);
  return s;
}

void recompute_reference_twist(RodState& state) {
  const int n = state.num_edges();
  state.ref_twist(0) = 0.0;
  for (int i = 1; i < n; ++i) {
    const Vec3 transported = parallel_transport<Real>(
        state.ref_d1.col(i - 1), state.tangents.col(i - 1),
        state.tangents.col(i));
    state.ref_twist(i) = signed_angle<Real>(transported, state.ref_d1.col(i),
                                            state.tangents.col(i));
  }
}

void update_frames_and_twist(RodState& state,
                             const Eigen::Ref<const Mat3X>& new_positions) {
  const int n = state.num_edges();
  for (int i = 0; i < n; ++i) {
    Vec3 e = new_positions.col(i + 1) - new_positions.col(i);
    const Real len = e.norm();
    if (len < 1e-14)
      throw DegenerateGeometry("zero-length edge " + std::to_string(i));
    const Vec3 t_new = e / len;
    Vec3 d1 = parallel_transport<Real>(Vec3(state.ref_d1.col(i)),
                                       Vec3(state.tangents.col(i)), t_new);
    // Re-orthonormalize against transport drift.
    d1 -= d1.dot(t_new) * t_new;
    d1.normalize();
    state.ref_d1.col(i) = d1;
    state.ref_d2.col(i) = t_new.cross(d1);
    state.tangents.col(i) = t_new;
  }
  state.nodes = new_positions;
  recompute_reference_twist(state);
}

}  // namespace helixstab
