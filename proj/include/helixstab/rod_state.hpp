#pragma once

#include "helixstab/material.hpp"
#include "helixstab/types.hpp"

namespace helixstab {

// Full discrete configuration of a rod with n edges / n+1 nodes.
//
// Reference frames {d1, d2, t} are one orthonormal triad per edge, evolved by
// time-parallel transport. The material frame of edge i is the reference
// frame rotated by theta(i) about the tangent. ref_twist(i) is the frame
// mismatch angle at interior node i (ref_twist(0) is unused and kept at 0).
struct RodState {
  Mat3X nodes;            // 3 x (n+1) node positions, m
  VecX thetas;            // n edge twist angles, rad
  VecX velocities;        // 4n+3 DOF velocities, m/s and rad/s
  Mat3X ref_d1, ref_d2;   // 3 x n reference directors
  Mat3X tangents;         // 3 x n unit edge tangents
  VecX ref_twist;         // n reference twist angles, rad
  VecX rest_edge_len;     // n undeformed edge lengths, m
  VecX rest_turning;      // n-1 undeformed turning angles (0: straight rod)

  int num_nodes() const { return static_cast<int>(nodes.cols()); }
  int num_edges() const { return static_cast<int>(thetas.size()); }
  int dof_count() const { return num_dof(num_edges()); }

  Vec3 edge(int i) const { return nodes.col(i + 1) - nodes.col(i); }
  Vec3 material_d1(int i) const;
  Vec3 material_d2(int i) const;

  // Undeformed length attributed to node i (half of each incident edge).
  Real voronoi_length(int i) const;

  // Flattened DOF vector [q_0, theta_0, ..., theta_{n-1}, q_n].
  VecX dof_vector() const;
  void set_from_dof_vector(const Eigen::Ref<const VecX>& q);
};

// Straight untwisted rod of length params.length along +z starting at the
// origin, n equal edges, reference directors d1 = -x, d2 = -y. Throws
// InvalidDiscretization for n < 3.
RodState make_straight_rod(const MaterialParams& params, int n);

// Moves the rod to new_positions: tangents recomputed, reference frames
// carried by time-parallel transport from the current tangents, reference
// twist refreshed from the updated frames. Throws DegenerateGeometry on a
// zero-length edge.
void update_frames_and_twist(RodState& state,
                             const Eigen::Ref<const Mat3X>& new_positions);

// Reference twist recomputation only (space-parallel transport mismatch of
// the current frames); used internally and by tests.
void recompute_reference_twist(RodState& state);

}  // namespace helixstab
