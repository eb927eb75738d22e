#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace helixstab {

using Real = double;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix3Xd;

// DOF vector layout: [q_0, theta_0, q_1, theta_1, ..., theta_{n-1}, q_n],
// size 4n+3 for a rod with n edges (n+1 nodes).
inline int num_dof(int num_edges) { return 4 * num_edges + 3; }
inline int pos_index(int node) { return 4 * node; }
inline int theta_index(int edge) { return 4 * edge + 3; }

}  // namespace helixstab
