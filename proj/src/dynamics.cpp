#include "helixstab/dynamics.hpp"

#include <Eigen/Geometry>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "helixstab/elastic.hpp"
#include "helixstab/frames.hpp"
#include "helixstab/rng.hpp"

namespace helixstab {

namespace {

Mat3 pose_frame(const EndPose& p) {
  Mat3 f;
  f.col(0) = p.director;
  f.col(1) = p.tangent.cross(p.director);
  f.col(2) = p.tangent;
  return f;
}

EndPose interpolate(const EndPose& a, const EndPose& b, Real u) {
  EndPose out;
  out.position = (1.0 - u) * a.position + u * b.position;
  out.twist_angle = (1.0 - u) * a.twist_angle + u * b.twist_angle;
  const Mat3 rel = pose_frame(b) * pose_frame(a).transpose();
  Eigen::AngleAxisd aa(rel);
  const Mat3 part =
      Eigen::AngleAxisd(u * aa.angle(), aa.axis()).toRotationMatrix();
  out.director = part * a.director;
  out.tangent = part * a.tangent;
  // Orthonormalize against accumulated rounding.
  out.tangent.normalize();
  out.director -= out.director.dot(out.tangent) * out.tangent;
  out.director.normalize();
  return out;
}

}  // namespace

BoundaryPose BoundarySpec::at(Real u) const {
  if (u <= 0.0) return from;
  if (u >= 1.0) return to;
  return BoundaryPose{interpolate(from.start, to.start, u),
                      interpolate(from.finish, to.finish, u)};
}

bool BoundarySpec::is_static() const {
  auto same = [](const EndPose& a, const EndPose& b) {
    return (a.position - b.position).norm() == 0.0 &&
           (a.tangent - b.tangent).norm() == 0.0 &&
           (a.director - b.director).norm() == 0.0 &&
           a.twist_angle == b.twist_angle;
  };
  return same(from.start, to.start) && same(from.finish, to.finish);
}

VecX lumped_mass_vector(const RodState& state, const MaterialParams& params) {
  const int n = state.num_edges();
  VecX m(state.dof_count());
  const Real line_density = params.density * params.cross_section_area();
  for (int i = 0; i <= n; ++i)
    m.segment<3>(pos_index(i))
        .setConstant(line_density * state.voronoi_length(i));
  const Real h2 = params.rod_radius * params.rod_radius;
  const Real polar = params.density * M_PI * h2 * h2 / 2.0;
  for (int j = 0; j < n; ++j)
    m(theta_index(j)) = polar * state.rest_edge_len(j);
  return m;
}

VecX external_forces(const RodState& state, const MaterialParams& params,
                     const SolverSettings& settings) {
  VecX f = VecX::Zero(state.dof_count());
  if (settings.gravity_enabled && params.gravity > 0.0) {
    const Real line_density = params.density * params.cross_section_area();
    for (int i = 0; i < state.num_nodes(); ++i)
      f(pos_index(i) + 2) =
          -params.gravity * line_density * state.voronoi_length(i);
  }
  return f;
}

std::vector<int> constrained_dofs(int num_edges) {
  const int n = num_edges;
  std::vector<int> idx;
  for (int k = 0; k < 3; ++k) idx.push_back(pos_index(0) + k);
  for (int k = 0; k < 3; ++k) idx.push_back(pos_index(1) + k);
  idx.push_back(theta_index(0));
  for (int k = 0; k < 3; ++k) idx.push_back(pos_index(n - 1) + k);
  for (int k = 0; k < 3; ++k) idx.push_back(pos_index(n) + k);
  idx.push_back(theta_index(n - 1));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> free_dofs(int num_edges) {
  const std::vector<int> pinned = constrained_dofs(num_edges);
  std::vector<int> idx;
  idx.reserve(num_dof(num_edges) - pinned.size());
  size_t p = 0;
  for (int i = 0; i < num_dof(num_edges); ++i) {
    if (p < pinned.size() && pinned[p] == i) {
      ++p;
      continue;
    }
    idx.push_back(i);
  }
  return idx;
}

namespace {

// Boundary targets expressed on the DOF vector. Theta targets are resolved
// against the reference frame the clamped edge will carry after the step
// (time-parallel transport onto the clamp tangent), unwrapped to stay within
// pi of the current value.
struct DofTargets {
  std::vector<int> indices;
  std::vector<Real> values;
};

DofTargets clamp_targets(const RodState& state, const BoundaryPose& bc) {
  const int n = state.num_edges();
  DofTargets t;
  auto push_vec = [&t](int base, const Vec3& v) {
    for (int k = 0; k < 3; ++k) {
      t.indices.push_back(base + k);
      t.values.push_back(v(k));
    }
  };

  const Vec3 q0 = bc.start.position;
  const Vec3 q1 = q0 + state.rest_edge_len(0) * bc.start.tangent;
  const Vec3 qn = bc.finish.position;
  const Vec3 qm = qn - state.rest_edge_len(n - 1) * bc.finish.tangent;
  push_vec(pos_index(0), q0);
  push_vec(pos_index(1), q1);
  push_vec(pos_index(n - 1), qm);
  push_vec(pos_index(n), qn);

  // Fixed end: theta_0 is clamped to the nominal twist value directly.
  t.indices.push_back(theta_index(0));
  t.values.push_back(bc.start.twist_angle);

  // Manipulated end: theta realizing the world-space director.
  Vec3 d1 = parallel_transport<Real>(Vec3(state.ref_d1.col(n - 1)),
                                     Vec3(state.tangents.col(n - 1)),
                                     bc.finish.tangent);
  d1 -= d1.dot(bc.finish.tangent) * bc.finish.tangent;
  d1.normalize();
  const Real angle =
      signed_angle<Real>(d1, bc.finish.director, bc.finish.tangent);
  t.indices.push_back(theta_index(n - 1));
  t.values.push_back(unwrap_near(angle, state.thetas(n - 1)));
  return t;
}

void apply_targets(VecX& q, const DofTargets& t) {
  for (size_t k = 0; k < t.indices.size(); ++k) q(t.indices[k]) = t.values[k];
}

}  // namespace

StepStats step(RodState& state, const BoundaryPose& bc,
               const MaterialParams& params, const SolverSettings& settings) {
  const int n = state.num_edges();
  const Real reach = state.rest_edge_len.sum();
  if ((bc.finish.position - bc.start.position).norm() > reach * 1.001)
    throw SolverDivergence("clamp targets exceed the rod length", 0.0);
  const Real dt = settings.dt;
  const Real tol = settings.resolved_newton_tol(params);
  const std::vector<int> free = free_dofs(n);
  const int nf = static_cast<int>(free.size());

  std::vector<int> full_to_free(state.dof_count(), -1);
  for (int k = 0; k < nf; ++k) full_to_free[free[k]] = k;

  const RodState start = state;  // frames transported from here each iterate
  const VecX q_old = start.dof_vector();
  const VecX mass = lumped_mass_vector(start, params);
  const VecX f_ext = external_forces(start, params, settings);
  const VecX inertia_coeff =
      mass / (dt * dt) + settings.mass_damping * mass / dt;
  const VecX q_pred = q_old + dt * start.velocities;

  const DofTargets targets = clamp_targets(start, bc);

  VecX q = q_pred;  // warm start from the inertial prediction
  apply_targets(q, targets);

  // The twist bookkeeping is path-dependent, so the reference frames are
  // re-adapted at every accepted iterate: the classical force/Jacobian
  // expressions are exact derivatives only at the adaptation point.
  RodState current = start;
  current.set_from_dof_vector(q);

  auto residual_of = [&](const RodState& at, const VecX& qq) -> VecX {
    return mass.cwiseProduct(qq - q_pred) / (dt * dt) +
           settings.mass_damping * mass.cwiseProduct(qq - q_old) / dt -
           internal_forces(at, params) - f_ext;
  };
  auto free_norm = [&](const VecX& r) {
    Real sum = 0.0;
    for (int idx : free) sum += r(idx) * r(idx);
    return std::sqrt(sum);
  };

  VecX r = residual_of(current, q);
  Real r_norm = free_norm(r);

  StepStats stats;
  stats.residual_history.push_back(r_norm);

  Eigen::SparseLU<Eigen::SparseMatrix<Real>> lu;
  RodState trial = current;
  // Levenberg shift, raised when the Newton direction makes no progress
  // (the step system is indefinite while the rod crosses a buckling
  // bifurcation, e.g. axial compression at the start of a bend).
  Real lambda = 0.0;
  while (r_norm > tol) {
    if (stats.newton_iters >= settings.newton_max_iters)
      throw SolverDivergence("newton did not converge", r_norm);
    ++stats.newton_iters;

    // Reduced system: energy Hessian plus inertia/damping diagonal.
    const Eigen::SparseMatrix<Real> hess = energy_hessian(current, params);
    std::vector<Eigen::Triplet<Real>> trips;
    trips.reserve(hess.nonZeros() + nf);
    for (int col = 0; col < hess.outerSize(); ++col) {
      const int fc = full_to_free[col];
      if (fc < 0) continue;
      for (Eigen::SparseMatrix<Real>::InnerIterator it(hess, col); it; ++it) {
        const int fr = full_to_free[it.row()];
        if (fr >= 0) trips.emplace_back(fr, fc, it.value());
      }
    }
    for (int k = 0; k < nf; ++k)
      trips.emplace_back(k, k, inertia_coeff(free[k]));
    Eigen::SparseMatrix<Real> a(nf, nf);
    a.setFromTriplets(trips.begin(), trips.end());
    const Real diag_scale = a.diagonal().cwiseAbs().mean();

    VecX rhs(nf);
    for (int k = 0; k < nf; ++k) rhs(k) = -r(free[k]);

    bool progressed = false;
    while (!progressed) {
      Eigen::SparseMatrix<Real> a_shift = a;
      if (lambda > 0.0) {
        for (int k = 0; k < nf; ++k)
          a_shift.coeffRef(k, k) += lambda * diag_scale;
      }
      lu.compute(a_shift);
      if (lu.info() != Eigen::Success)
        throw SolverDivergence("linear solve failed", r_norm);
      const VecX delta = lu.solve(rhs);

      // Step halving on residual increase; keep the best candidate seen.
      // Trial frames transport from the last accepted iterate.
      Real alpha = 1.0;
      Real best_norm = std::numeric_limits<Real>::infinity();
      VecX best_q, best_r;
      RodState best_state;
      for (int halving = 0; halving <= 10; ++halving) {
        VecX q_try = q;
        for (int k = 0; k < nf; ++k) q_try(free[k]) += alpha * delta(k);
        try {
          trial = current;
          trial.set_from_dof_vector(q_try);
          const VecX r_try = residual_of(trial, q_try);
          const Real r_try_norm = free_norm(r_try);
          if (r_try_norm < best_norm) {
            best_norm = r_try_norm;
            best_q = std::move(q_try);
            best_r = r_try;
            best_state = trial;
          }
          if (r_try_norm < r_norm) break;
        } catch (const DegenerateGeometry&) {
          // Candidate folded the rod; shorten the step.
        }
        alpha *= 0.5;
      }
      if (best_norm < r_norm) {
        progressed = true;
        q = std::move(best_q);
        r = std::move(best_r);
        r_norm = best_norm;
        current = std::move(best_state);
        lambda = lambda > 1e-8 ? 0.25 * lambda : 0.0;
      } else {
        lambda = lambda > 0.0 ? 10.0 * lambda : 1e-4;
        if (lambda > 1e8)
          throw SolverDivergence("line search stalled", r_norm);
      }
    }
    stats.residual_history.push_back(r_norm);
  }

  current.velocities = (q - q_old) / dt;
  state = std::move(current);
  stats.residual = r_norm;
  return stats;
}

Real static_residual(const RodState& state, const MaterialParams& params,
                     const SolverSettings& settings) {
  const VecX g = internal_forces(state, params) +
                 external_forces(state, params, settings);
  Real sum = 0.0;
  for (int idx : free_dofs(state.num_edges())) sum += g(idx) * g(idx);
  return std::sqrt(sum);
}

namespace {

bool matches_clamp(const RodState& state, const BoundaryPose& bc) {
  const int n = state.num_edges();
  const Real tol = 1e-12 * std::max(1.0, state.rest_edge_len.sum());
  if ((state.nodes.col(0) - bc.start.position).norm() > tol) return false;
  if ((state.nodes.col(n) - bc.finish.position).norm() > tol) return false;
  if ((state.tangents.col(0) - bc.start.tangent).norm() > 1e-9) return false;
  if ((state.tangents.col(n - 1) - bc.finish.tangent).norm() > 1e-9)
    return false;
  if ((state.material_d1(n - 1) - bc.finish.director).norm() > 1e-9)
    return false;
  return true;
}

// One step toward end_pose over time dt, recursively refined in time (and
// along the boundary interpolant pose_at) when Newton fails: the implicit
// system loses definiteness while the rod crosses buckling bifurcations, and
// a shorter step restores it.
template <typename PoseAt>
void refined_step(RodState& state, const PoseAt& pose_at, Real u0, Real u1,
                  const BoundaryPose& end_pose, const MaterialParams& params,
                  const SolverSettings& settings, Real dt, int depth) {
  SolverSettings local = settings;
  local.dt = dt;
  try {
    step(state, end_pose, params, local);
    return;
  } catch (const SolverDivergence&) {
    if (depth >= 8) throw;
  }
  const Real um = 0.5 * (u0 + u1);
  refined_step(state, pose_at, u0, um, pose_at(um), params, settings,
               0.5 * dt, depth + 1);
  refined_step(state, pose_at, um, u1, end_pose, params, settings, 0.5 * dt,
               depth + 1);
}

}  // namespace

SettleStats settle(RodState& state, const BoundaryPose& bc,
                   const MaterialParams& params,
                   const SolverSettings& settings) {
  const Real v_tol = settings.resolved_settle_tol(params);
  const Real f_tol = settings.resolved_newton_tol(params);

  SettleStats stats;
  auto quiescent = [&]() {
    return state.velocities.lpNorm<Eigen::Infinity>() < v_tol &&
           static_residual(state, params, settings) < f_tol;
  };

  if (matches_clamp(state, bc) && quiescent()) {
    stats.final_velocity = state.velocities.lpNorm<Eigen::Infinity>();
    stats.final_residual = static_residual(state, params, settings);
    return stats;
  }

  // Relaxation only needs the endpoint, so the step is allowed to grow
  // while Newton keeps converging; it shrinks back on divergence.
  Real dt_scale = 1.0;
  SolverSettings local = settings;
  for (int i = 0; i < settings.settle_max_steps; ++i) {
    local.dt = settings.dt * dt_scale;
    try {
      step(state, bc, params, local);
      dt_scale = std::min(1.5 * dt_scale, settings.settle_dt_max_scale);
    } catch (const SolverDivergence&) {
      if (dt_scale > 1.0) {
        dt_scale = std::max(1.0, 0.25 * dt_scale);
        continue;
      }
      auto hold = [&bc](Real) { return bc; };
      refined_step(state, hold, 0.0, 1.0, bc, params, settings, settings.dt,
                   0);
    }
    ++stats.steps;
    if (quiescent()) {
      stats.final_velocity = state.velocities.lpNorm<Eigen::Infinity>();
      stats.final_residual = static_residual(state, params, settings);
      return stats;
    }
  }
  throw NonEquilibrium("no equilibrium within " +
                       std::to_string(settings.settle_max_steps) + " steps");
}

void drive(RodState& state, const BoundarySpec& spec,
           const MaterialParams& params, const SolverSettings& settings,
           const DriveOptions& options) {
  const Real length = state.rest_edge_len.sum();
  const Real omega = options.angular_speed > 0
                         ? options.angular_speed
                         : 2.0 * M_PI * spec.speed / length;

  const Real move = std::max(
      (spec.to.finish.position - spec.from.finish.position).norm(),
      (spec.to.start.position - spec.from.start.position).norm());
  const Mat3 rel = pose_frame(spec.to.finish) *
                   pose_frame(spec.from.finish).transpose();
  const Real turn = std::abs(Eigen::AngleAxisd(rel).angle()) +
                    std::abs(spec.to.finish.twist_angle -
                             spec.from.finish.twist_angle);

  const Real duration =
      std::max({move / spec.speed, turn / omega, settings.dt});
  const int steps = static_cast<int>(std::ceil(duration / settings.dt));

  // Per-knot uniform path offsets, interpolated along the trajectory; the
  // first and last knots are zero so the endpoints stay exact.
  std::vector<Vec3> knots;
  if (options.jitter_amplitude > 0.0) {
    SplitMix64 rng(options.jitter_seed);
    const int inner =
        std::max(0, static_cast<int>(std::ceil(duration * options.jitter_rate)) - 1);
    knots.push_back(Vec3::Zero());
    for (int k = 0; k < inner; ++k)
      knots.push_back(options.jitter_amplitude * rng.symmetric_vec3());
    knots.push_back(Vec3::Zero());
  }
  auto jitter_at = [&knots](Real u) -> Vec3 {
    if (knots.empty()) return Vec3::Zero();
    const Real x = u * (knots.size() - 1);
    const int i = std::min(static_cast<int>(x),
                           static_cast<int>(knots.size()) - 2);
    const Real frac = x - i;
    return (1.0 - frac) * knots[i] + frac * knots[i + 1];
  };

  // The offset may not carry the end beyond the taut sphere (or farther out
  // than the nominal pose already sits): a physical manipulator is held back
  // by the rod there.
  const Real reach = length;
  auto pose_at = [&spec, &jitter_at, reach](Real u) {
    BoundaryPose pose = spec.at(u);
    const Vec3 off = jitter_at(u);
    if (off.squaredNorm() > 0.0) {
      const Vec3 nominal = pose.finish.position - pose.start.position;
      const Vec3 rel = nominal + off;
      const Real cap = std::max(nominal.norm(), 0.999 * reach);
      const Real dist = rel.norm();
      pose.finish.position =
          pose.start.position + (dist > cap ? rel * (cap / dist) : rel);
    }
    return pose;
  };
  for (int s = 1; s <= steps; ++s) {
    const Real u0 = static_cast<Real>(s - 1) / steps;
    const Real u1 = static_cast<Real>(s) / steps;
    refined_step(state, pose_at, u0, u1, pose_at(u1), params, settings,
                 settings.dt, 0);
  }
}

}  // namespace helixstab
