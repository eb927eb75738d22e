#include "helixstab/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "helixstab/rng.hpp"

namespace helixstab {

const char* to_string(SweepTermination t) {
  switch (t) {
    case SweepTermination::instability: return "instability";
    case SweepTermination::max_norm_reached: return "max-norm";
    case SweepTermination::solver_failure: return "solver-failure";
  }
  return "unknown";
}

Real SweepSettings::resolved_damping(const MaterialParams& p) const {
  if (damping >= 0.0) return damping;
  // Twice the first clamped-clamped bending mode rate.
  const Real mode = std::pow(4.730 / p.length, 2) *
                    std::sqrt(p.bending_stiffness() / p.linear_density());
  return 2.0 * mode;
}

SolverSettings SweepSettings::resolved_solver(const MaterialParams& p) const {
  SolverSettings s = solver;
  s.mass_damping = resolved_damping(p);
  // Detection compares node deviations against the helix radius, so the
  // equilibrium slack has to sit well below it; tighter than the plain
  // dynamics default.
  if (s.newton_tol <= 0.0) s.newton_tol = 1e-10 * p.axial_stiffness();
  return s;
}

namespace {

Real median_of(std::vector<Real> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::optional<size_t> detect_instability(const std::vector<Real>& errors,
                                         Real error_abs, Real jump_factor) {
  for (size_t k = 1; k < errors.size(); ++k) {
    if (errors[k] <= error_abs) continue;
    const std::vector<Real> head(errors.begin(), errors.begin() + k);
    if (errors[k] > jump_factor * median_of(head)) return k;
  }
  return std::nullopt;
}

std::vector<Vec3> sample_directions(int m) {
  std::vector<Vec3> dirs;
  dirs.reserve(m);
  const Real golden = 0.6180339887498949;
  for (int i = 0; i < m; ++i) {
    const Real z = 1.0 - static_cast<Real>(i) / m;  // s_kappa
    const Real r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Real phi = 2.0 * M_PI * golden * i;
    dirs.push_back(Vec3(z, r * std::cos(phi), r * std::sin(phi)).normalized());
  }
  return dirs;
}

namespace {

HelixPoint point_at(const Vec3& dir, Real norm) {
  return HelixPoint{dir.x() * norm, dir.y() * norm, dir.z() * norm};
}

uint64_t derived_seed(uint64_t seed, uint64_t salt) {
  SplitMix64 rng(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
  return rng.next();
}

// Seeded kick of the free interior nodes; breaks the symmetric (pitchfork)
// branches the exact arithmetic would otherwise ride through the onset.
void perturb_interior(RodState& state, Real amplitude, SplitMix64& rng) {
  if (amplitude <= 0.0) return;
  Mat3X q = state.nodes;
  for (int i = 2; i <= state.num_edges() - 2; ++i)
    q.col(i) += amplitude * rng.symmetric_vec3();
  update_frames_and_twist(state, q);
}

struct SegmentRunner {
  const Vec3 dir;
  const MaterialParams& params;
  const SweepSettings& settings;
  const SolverSettings solver;
  const Real kick;
  SplitMix64 kick_rng;

  SegmentRunner(const Vec3& d, const MaterialParams& p,
                const SweepSettings& s)
      : dir(d),
        params(p),
        settings(s),
        solver(s.resolved_solver(p)),
        kick(s.perturbation * p.length),
        kick_rng(derived_seed(s.seed, 0xbeef)) {}

  // Drives from the clamp at norm a to the clamp at norm b and settles.
  void advance(RodState& state, Real a, Real b, int segment_id) {
    BoundarySpec spec{helix_clamp(point_at(dir, a), params, settings.n),
                      helix_clamp(point_at(dir, b), params, settings.n),
                      settings.speed};
    DriveOptions opts;
    opts.jitter_amplitude = settings.jitter;
    opts.jitter_seed = derived_seed(settings.seed, segment_id);
    drive(state, spec, params, solver, opts);
    perturb_interior(state, kick, kick_rng);
    settle(state, spec.to, params, solver);
  }
};

}  // namespace

SweepResult sweep_ray(const Vec3& direction, const MaterialParams& params,
                      const SweepSettings& settings) {
  SweepResult result;
  result.direction = direction;

  RodState state = make_straight_rod(params, settings.n);
  SegmentRunner runner(direction, params, settings);

  std::vector<Real> errors;
  const int samples =
      static_cast<int>(std::floor(settings.max_norm / settings.step + 1e-9));
  for (int k = 1; k <= samples; ++k) {
    const Real norm = k * settings.step;
    const RodState before = state;
    try {
      runner.advance(state, (k - 1) * settings.step, norm, k);
    } catch (const SimulationError& err) {
      result.termination = SweepTermination::solver_failure;
      result.failure_reason = err.what();
      // Divergence right after a detected jump would have ended the sweep
      // already; failing here means no crossing was established.
      return result;
    }
    const Real e = helix_error(state, point_at(direction, norm));
    result.samples.push_back({norm, e, k});
    errors.push_back(e);

    const auto crossing =
        detect_instability(errors, settings.error_abs, settings.jump_factor);
    if (crossing && *crossing == errors.size() - 1) {
      result.crossing_index = static_cast<int>(*crossing);
      result.termination = SweepTermination::instability;

      Real lo = (k - 1) * settings.step;
      Real hi = norm;
      if (settings.refine) {
        const std::vector<Real> head(errors.begin(), errors.end() - 1);
        const Real gate =
            k > 1 ? std::max(settings.error_abs,
                             settings.jump_factor * median_of(head))
                  : settings.error_abs;
        RodState stable = before;
        Real stable_norm = lo;
        const Real resolution = settings.step / 8.0;
        int bisection_id = 1000 * k;
        result.brackets.emplace_back(lo, hi);
        while (hi - lo > resolution + 1e-12) {
          const Real mid = 0.5 * (lo + hi);
          RodState probe = stable;
          bool unstable;
          try {
            runner.advance(probe, stable_norm, mid, ++bisection_id);
            unstable =
                helix_error(probe, point_at(direction, mid)) > gate;
          } catch (const SimulationError&) {
            unstable = true;  // divergence past the onset
          }
          if (unstable) {
            hi = mid;
          } else {
            lo = mid;
            stable_norm = mid;
            stable = std::move(probe);
          }
          result.brackets.emplace_back(lo, hi);
        }
      }
      result.critical_norm = 0.5 * (lo + hi);
      return result;
    }
  }
  result.termination = SweepTermination::max_norm_reached;
  return result;
}

RodState settle_helix_point(const HelixPoint& p, const MaterialParams& params,
                            const SweepSettings& settings) {
  RodState state = make_straight_rod(params, settings.n);
  const Vec3 target(p.kappa, p.tau, p.omega);
  const Real norm = target.norm();
  if (norm == 0.0) {
    settle(state, helix_clamp(p, params, settings.n), params,
           settings.resolved_solver(params));
    return state;
  }
  const Vec3 dir = target / norm;
  SegmentRunner runner(dir, params, settings);
  const int segments =
      std::max(1, static_cast<int>(std::ceil(norm / settings.step)));
  for (int k = 1; k <= segments; ++k)
    runner.advance(state, norm * (k - 1) / segments, norm * k / segments, k);
  return state;
}

std::vector<BoundaryPoint> append_reflections(std::vector<BoundaryPoint> pts) {
  const size_t swept = pts.size();
  for (size_t i = 0; i < swept; ++i) {
    const BoundaryPoint& p = pts[i];
    if (p.reflected || (p.tau == 0.0 && p.omega == 0.0)) continue;
    pts.push_back(BoundaryPoint{p.kappa, -p.tau, -p.omega, true});
  }
  return pts;
}

uint64_t sweep_fingerprint(const MaterialParams& params,
                           const SweepSettings& settings) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the numeric fields
  auto mix = [&h](uint64_t bits) {
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_real = [&mix](Real v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  };
  for (Real v : {params.youngs_modulus, params.poisson_ratio, params.density,
                 params.rod_radius, params.length, params.gravity})
    mix_real(v);
  mix(static_cast<uint64_t>(settings.n));
  for (Real v : {settings.step, settings.max_norm, settings.error_abs,
                 settings.jump_factor, settings.speed, settings.damping,
                 settings.jitter, settings.perturbation})
    mix_real(v);
  mix(settings.refine ? 1 : 0);
  mix(settings.seed);
  for (Real v : {settings.solver.dt, settings.solver.newton_tol,
                 settings.solver.settle_velocity_tol,
                 settings.solver.mass_damping,
                 settings.solver.settle_dt_max_scale})
    mix_real(v);
  mix(static_cast<uint64_t>(settings.solver.newton_max_iters));
  mix(static_cast<uint64_t>(settings.solver.settle_max_steps));
  mix(settings.solver.gravity_enabled ? 1 : 0);
  return h;
}

BoundarySurface generate_boundary(const std::vector<Vec3>& directions,
                                  const MaterialParams& params,
                                  const SweepSettings& settings, int workers) {
  struct Slot {
    std::optional<SweepResult> result;
    std::string error;
  };
  std::vector<Slot> slots(directions.size());

  const int pool = std::max(1, workers);
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= directions.size()) return;
      try {
        slots[i].result = sweep_ray(directions[i], params, settings);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }

  BoundarySurface surface;
  surface.fingerprint = sweep_fingerprint(params, settings);
  for (size_t i = 0; i < slots.size(); ++i) {
    const Slot& slot = slots[i];
    if (!slot.error.empty()) {
      surface.failures.push_back({static_cast<int>(i), slot.error});
      continue;
    }
    const SweepResult& r = *slot.result;
    if (r.termination == SweepTermination::instability && r.critical_norm) {
      const HelixPoint p = point_at(r.direction, *r.critical_norm);
      surface.points.push_back({p.kappa, p.tau, p.omega, false});
    } else {
      surface.failures.push_back(
          {static_cast<int>(i),
           std::string(to_string(r.termination)) +
               (r.failure_reason.empty() ? "" : ": " + r.failure_reason)});
    }
  }
  surface.points = append_reflections(std::move(surface.points));
  return surface;
}

std::optional<DisturbanceKind> disturbance_kind_from(const std::string& name) {
  if (name == "poisson") return DisturbanceKind::poisson;
  if (name == "youngs") return DisturbanceKind::youngs;
  if (name == "gravito_bending") return DisturbanceKind::gravito_bending;
  if (name == "speed") return DisturbanceKind::speed;
  if (name == "jitter") return DisturbanceKind::jitter;
  return std::nullopt;
}

const char* to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::poisson: return "poisson";
    case DisturbanceKind::youngs: return "youngs";
    case DisturbanceKind::gravito_bending: return "gravito_bending";
    case DisturbanceKind::speed: return "speed";
    case DisturbanceKind::jitter: return "jitter";
  }
  return "unknown";
}

std::vector<DisturbanceCurve> disturbance_sweep(
    DisturbanceKind kind, const std::vector<Real>& values,
    const Vec3& direction, const MaterialParams& params,
    const SweepSettings& settings, int workers) {
  std::vector<MaterialParams> mats(values.size(), params);
  std::vector<SweepSettings> sweeps(values.size(), settings);
  for (size_t i = 0; i < values.size(); ++i) {
    const Real v = values[i];
    switch (kind) {
      case DisturbanceKind::poisson:
        mats[i].poisson_ratio = v;
        break;
      case DisturbanceKind::youngs:
        mats[i].youngs_modulus = v;
        break;
      case DisturbanceKind::gravito_bending: {
        // Radius realizing the requested L_gb / L at fixed E, rho, g.
        const Real lgb = v * params.length;
        mats[i].rod_radius = std::sqrt(8.0 * params.density * params.gravity *
                                       lgb * lgb * lgb /
                                       params.youngs_modulus);
        sweeps[i].solver.gravity_enabled = true;
        break;
      }
      case DisturbanceKind::speed:
        sweeps[i].speed = v;
        break;
      case DisturbanceKind::jitter:
        sweeps[i].jitter = v;
        break;
    }
  }

  std::vector<DisturbanceCurve> curves(values.size());
  const int pool = std::max(1, workers);
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      curves[i].value = values[i];
      curves[i].sweep = sweep_ray(direction, mats[i], sweeps[i]);
    }
  };
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  return curves;
}

}  // namespace helixstab
