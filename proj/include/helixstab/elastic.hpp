#pragma once

#include <Eigen/SparseCore>

#include "helixstab/material.hpp"
#include "helixstab/rod_state.hpp"

namespace helixstab {

struct EnergyBreakdown {
  Real stretching = 0.0;
  Real bending = 0.0;
  Real twisting = 0.0;
  Real total() const { return stretching + bending + twisting; }
};

// Elastic energies of the current configuration.
//
// Stretching: sum over edges of 1/2 k_s (1 - |e|/|e0|)^2 |e0|.
// Bending: sum over interior nodes of 1/2 k_b (2 tan(phi/2))^2 / l_i with
//   the Voronoi length l_i = (|e0_{i-1}| + |e0_i|)/2; straight rest shape.
// Twisting: sum over interior nodes of 1/2 k_t tau_i^2 / l_i with
//   tau_i = theta_i - theta_{i-1} + ref_twist_i.
EnergyBreakdown elastic_energy(const RodState& state,
                               const MaterialParams& params);

// Restoring force F = -dE/dq on the 4n+3 DOF vector.
VecX internal_forces(const RodState& state, const MaterialParams& params);

// dF/dq = -d2E/dq2; symmetric, banded (11-DOF stencil).
Eigen::SparseMatrix<Real> internal_jacobian(const RodState& state,
                                            const MaterialParams& params);

// Hessian of the elastic energy (= -internal_jacobian), exposed because the
// implicit solver adds it to the mass terms directly.
Eigen::SparseMatrix<Real> energy_hessian(const RodState& state,
                                         const MaterialParams& params);

}  // namespace helixstab
