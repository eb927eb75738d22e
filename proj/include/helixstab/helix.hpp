#pragma once

#include "helixstab/dynamics.hpp"
#include "helixstab/material.hpp"
#include "helixstab/rod_state.hpp"

namespace helixstab {

// Point in the nondimensional helix parameter space:
//   kappa = centerline curvature * L      (>= 0)
//   tau   = centerline torsion * L
//   omega = twisting moment * L / k_b
struct HelixPoint {
  Real kappa = 0.0;
  Real tau = 0.0;
  Real omega = 0.0;
};

// Arc-length-parameterized helix sampled at n+1 nodes spaced L/n apart along
// the curve. Starts at the origin with tangent +z and principal normal -x;
// kappa = 0 degenerates to a straight line.
Mat3X helix_centerline(const HelixPoint& p, Real length, int n);

// Clamped boundary conditions realizing the helix point: both terminal edges
// on the helix chords, fixed-end director carried from the rest frame, moved
// end director equal to the zero-twist frame transported along the helix and
// rotated by omega/c about the end tangent.
BoundaryPose helix_clamp(const HelixPoint& p, const MaterialParams& params,
                         int n);

// The same clamp as a (static) boundary trajectory.
BoundarySpec boundary_spec_for(const HelixPoint& p,
                               const MaterialParams& params, int n);

// Radius-normalized mean deviation of the rod's nodes from the predicted
// helix; the normalization falls back to 1/L for kappa below 1e-6.
Real helix_error(const RodState& state, const HelixPoint& p);

}  // namespace helixstab
