#pragma once

#include <optional>
#include <string>
#include <vector>

#include "helixstab/dynamics.hpp"
#include "helixstab/helix.hpp"

namespace helixstab {

struct SweepSample {
  Real norm = 0.0;        // distance along the search direction
  Real error = 0.0;       // helix deviation at the settled state
  int snapshot_id = 0;    // sample index within the sweep
};

enum class SweepTermination { instability, max_norm_reached, solver_failure };

const char* to_string(SweepTermination t);

struct SweepResult {
  Vec3 direction = Vec3::UnitX();
  std::vector<SweepSample> samples;
  std::optional<Real> critical_norm;  // midpoint of the final bracket
  SweepTermination termination = SweepTermination::max_norm_reached;
  int crossing_index = -1;            // sample index of the detected jump
  std::string failure_reason;
  // Refinement brackets in visit order, outermost first (diagnostics).
  std::vector<std::pair<Real, Real>> brackets;
};

struct SweepSettings {
  int n = 50;               // rod discretization (edges)
  Real step = 0.05;         // sample spacing along the ray
  Real max_norm = 20.0;
  Real error_abs = 0.05;    // absolute error gate of the detector
  Real jump_factor = 5.0;   // relative gate: e > jump_factor * running median
  bool refine = true;       // bisection refinement of the onset bracket
  Real speed = 0.05;        // boundary traversal speed, m/s
  Real damping = -1.0;      // drive/settle mass damping; negative derives
                            // twice the first bending mode rate
  Real jitter = 0.0;        // jitter amplitude, m
  Real perturbation = 1e-7; // seeded settle kick, relative to rod length
  uint64_t seed = 42;
  SolverSettings solver;

  Real resolved_damping(const MaterialParams& p) const;
  SolverSettings resolved_solver(const MaterialParams& p) const;
};

// First index k >= 1 with e_k > error_abs and e_k > jump_factor * median of
// the preceding samples.
std::optional<size_t> detect_instability(const std::vector<Real>& errors,
                                         Real error_abs, Real jump_factor);

// m near-uniform unit directions on the half-sphere s_kappa >= 0
// (deterministic golden-angle spiral; m = 1 gives the pure-curvature axis).
std::vector<Vec3> sample_directions(int m);

// Quasi-static ray sweep from the origin of the parameter space until the
// instability detector fires or max_norm is reached.
SweepResult sweep_ray(const Vec3& direction, const MaterialParams& params,
                      const SweepSettings& settings);

// Drives the rod quasi-statically from rest to the given parameter point
// (along its ray, in step-sized increments) and settles there.
RodState settle_helix_point(const HelixPoint& p, const MaterialParams& params,
                            const SweepSettings& settings);

struct BoundaryPoint {
  Real kappa = 0.0, tau = 0.0, omega = 0.0;
  bool reflected = false;
};

struct DirectionFailure {
  int index = -1;
  std::string reason;
};

struct BoundarySurface {
  std::vector<BoundaryPoint> points;
  std::vector<DirectionFailure> failures;
  uint64_t fingerprint = 0;
};

// Appends the (kappa, -tau, -omega) image of every swept point that has a
// nonzero tau or omega.
std::vector<BoundaryPoint> append_reflections(std::vector<BoundaryPoint> pts);

// One sweep per direction distributed over a worker pool; output is
// independent of the worker count.
BoundarySurface generate_boundary(const std::vector<Vec3>& directions,
                                  const MaterialParams& params,
                                  const SweepSettings& settings, int workers);

uint64_t sweep_fingerprint(const MaterialParams& params,
                           const SweepSettings& settings);

enum class DisturbanceKind { poisson, youngs, gravito_bending, speed, jitter };

std::optional<DisturbanceKind> disturbance_kind_from(const std::string& name);
const char* to_string(DisturbanceKind k);

struct DisturbanceCurve {
  Real value = 0.0;
  SweepResult sweep;
};

// Families of sweeps along one direction with one parameter varied:
// poisson ratio, Young's modulus, gravito-bending length (via the radius,
// gravity on), traversal speed, or jitter amplitude.
std::vector<DisturbanceCurve> disturbance_sweep(DisturbanceKind kind,
                                                const std::vector<Real>& values,
                                                const Vec3& direction,
                                                const MaterialParams& params,
                                                const SweepSettings& settings,
                                                int workers = 1);

}  // namespace helixstab
