#pragma once

#include <cstdint>
#include <vector>

#include "helixstab/material.hpp"
#include "helixstab/rod_state.hpp"

namespace helixstab {

// Clamp of one rod end: the terminal node position, the direction of the
// clamped terminal edge, and the world-space material director of that edge.
// twist_angle is the nominal unwrapped rotation carried for continuity and
// reporting; the theta DOF realizing the director is recomputed against the
// simulation's reference frame at solve time.
struct EndPose {
  Vec3 position = Vec3::Zero();
  Vec3 tangent = Vec3::UnitZ();
  Vec3 director = -Vec3::UnitX();
  Real twist_angle = 0.0;
};

// Instantaneous clamped boundary conditions at both ends.
struct BoundaryPose {
  EndPose start;   // fixed end, terminal node q_0
  EndPose finish;  // manipulated end, terminal node q_n
};

// Time-parameterized boundary trajectory over u in [0,1]: positions move
// linearly in Cartesian space, frames along the geodesic of the relative
// rotation, twist angles linearly.
struct BoundarySpec {
  BoundaryPose from, to;
  Real speed = 0.05;  // manipulated-end traversal speed, m/s

  BoundaryPose at(Real u) const;
  bool is_static() const;

  static BoundarySpec fixed(const BoundaryPose& pose, Real speed = 0.05) {
    return BoundarySpec{pose, pose, speed};
  }
};

struct SolverSettings {
  Real dt = 0.005;                // s
  Real newton_tol = -1.0;         // N; negative selects 1e-8 * k_s
  int newton_max_iters = 50;
  Real settle_velocity_tol = -1.0;  // negative selects 1e-5 * L per second
  bool gravity_enabled = false;
  Real mass_damping = 0.0;        // 1/s
  int settle_max_steps = 60000;
  Real settle_dt_max_scale = 16.0;  // settle may grow dt up to this factor

  Real resolved_newton_tol(const MaterialParams& p) const {
    return newton_tol > 0 ? newton_tol : 1e-8 * p.axial_stiffness();
  }
  Real resolved_settle_tol(const MaterialParams& p) const {
    return settle_velocity_tol > 0 ? settle_velocity_tol : 1e-5 * p.length;
  }
};

struct StepStats {
  int newton_iters = 0;
  Real residual = 0.0;
  std::vector<Real> residual_history;
};

struct SettleStats {
  int steps = 0;
  Real final_velocity = 0.0;
  Real final_residual = 0.0;
};

// Diagonal lumped mass over the DOF vector: rho*A*voronoi length per node,
// polar rotary inertia rho*pi*h^4/2 * rest edge length per twist DOF.
VecX lumped_mass_vector(const RodState& state, const MaterialParams& params);

// External force vector (gravity along -z when enabled).
VecX external_forces(const RodState& state, const MaterialParams& params,
                     const SolverSettings& settings);

// DOF indices pinned by the clamps: q_0, q_1, theta_0 and
// q_{n-1}, q_n, theta_{n-1}.
std::vector<int> constrained_dofs(int num_edges);
std::vector<int> free_dofs(int num_edges);

// One implicit-Euler step onto the boundary targets: constrained DOFs are set
// exactly, free DOFs solve the equation of motion by Newton iteration with
// step halving. Throws SolverDivergence if Newton fails.
StepStats step(RodState& state, const BoundaryPose& bc,
               const MaterialParams& params, const SolverSettings& settings);

// Norm of internal+external force restricted to the free DOFs.
Real static_residual(const RodState& state, const MaterialParams& params,
                     const SolverSettings& settings);

// Steps under a fixed boundary until velocities and the free-DOF force
// residual are below tolerance. Throws NonEquilibrium past the step budget.
SettleStats settle(RodState& state, const BoundaryPose& bc,
                   const MaterialParams& params,
                   const SolverSettings& settings);

struct DriveOptions {
  // Path jitter of the manipulated end: zero-mean uniform offsets of
  // magnitude jitter_amplitude drawn at jitter_rate knots per second and
  // linearly interpolated, so the disturbance stays within the bandwidth a
  // physical manipulator could realize. The trajectory still lands exactly
  // on the final pose.
  Real jitter_amplitude = 0.0;  // m
  Real jitter_rate = 2.0;       // knots per second
  uint64_t jitter_seed = 0;
  Real angular_speed = -1.0;    // rad/s; negative selects 2*pi*speed/L
};

// Quasi-statically traverses the boundary trajectory, stepping the dynamics.
void drive(RodState& state, const BoundarySpec& spec,
           const MaterialParams& params, const SolverSettings& settings,
           const DriveOptions& options = {});

}  // namespace helixstab
