// Command-line driver: gradient checks, single-ray sweeps, boundary-surface
// generation, disturbance studies, and single-point helix settles.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "helixstab/elastic.hpp"
#include "helixstab/io.hpp"
#include "helixstab/rng.hpp"

using namespace helixstab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;

int resolve_workers(const RunConfig& config, int flag_value) {
  // Priority: --workers flag, HELIXSTAB_WORKERS, config, hardware.
  int w = config.workers;
  if (const char* env = std::getenv("HELIXSTAB_WORKERS")) w = std::atoi(env);
  if (flag_value > 0) w = flag_value;
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, w);
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.output_dir);
  const auto path = std::filesystem::path(config.output_dir) / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write to " + path.string());
  std::cout << "writing " << path.string() << "\n";
  return out;
}

Vec3 parse_direction(const std::string& text) {
  Vec3 d;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &d.x(), &d.y(), &d.z()) != 3)
    throw ConfigError("direction must be sx,sy,sz");
  if (d.norm() == 0.0) throw ConfigError("direction must be nonzero");
  if (d.x() < 0.0) throw ConfigError("direction needs s_kappa >= 0");
  return d.normalized();
}

// Central-difference check of the analytic force and jacobian on randomly
// perturbed rods; prints the worst relative errors.
int run_gradcheck(const RunConfig& config) {
  const MaterialParams& params = config.material;
  const int n = 20;
  const int trials = 100;
  const Real h = 1e-6 * params.length;

  Real worst_grad = 0.0, worst_jac = 0.0;
  SplitMix64 rng(config.sweep.seed);
  for (int trial = 0; trial < trials; ++trial) {
    RodState base = make_straight_rod(params, n);
    Mat3X q = base.nodes;
    const Real amp = 0.2 * params.length / n;
    for (int i = 0; i <= n; ++i) q.col(i) += amp * rng.symmetric_vec3();
    update_frames_and_twist(base, q);
    for (int i = 0; i < n; ++i) base.thetas(i) = 0.3 * rng.symmetric();

    const VecX q0 = base.dof_vector();
    auto probe_at = [&](const VecX& qq) {
      RodState probe = base;
      probe.set_from_dof_vector(qq);
      return probe;
    };

    VecX g_fd(q0.size());
    VecX qp = q0;
    for (int j = 0; j < q0.size(); ++j) {
      qp(j) = q0(j) + h;
      const Real ep = elastic_energy(probe_at(qp), params).total();
      qp(j) = q0(j) - h;
      const Real em = elastic_energy(probe_at(qp), params).total();
      qp(j) = q0(j);
      g_fd(j) = (ep - em) / (2 * h);
    }
    const VecX g_an = -internal_forces(base, params);
    worst_grad = std::max(worst_grad,
                          (g_fd - g_an).lpNorm<Eigen::Infinity>() /
                              g_an.lpNorm<Eigen::Infinity>());

    if (trial < 10) {  // jacobian columns are n times costlier
      MatX j_fd(q0.size(), q0.size());
      for (int j = 0; j < q0.size(); ++j) {
        qp(j) = q0(j) + h;
        const VecX fp = internal_forces(probe_at(qp), params);
        qp(j) = q0(j) - h;
        const VecX fm = internal_forces(probe_at(qp), params);
        qp(j) = q0(j);
        j_fd.col(j) = (fp - fm) / (2 * h);
      }
      const MatX j_an = MatX(internal_jacobian(base, params));
      worst_jac = std::max(worst_jac, (j_fd - j_an).cwiseAbs().maxCoeff() /
                                          j_an.cwiseAbs().maxCoeff());
    }
  }

  std::cout << "gradient  max relative error: " << format_real(worst_grad)
            << "  (tolerance 1e-4)\n";
  std::cout << "jacobian  max relative error: " << format_real(worst_jac)
            << "  (tolerance 1e-3)\n";
  const bool ok = worst_grad <= 1e-4 && worst_jac <= 1e-3;
  std::cout << (ok ? "gradcheck PASS\n" : "gradcheck FAIL\n");
  return ok ? kExitOk : kExitSimulation;
}

void print_sweep_summary(const SweepResult& result) {
  std::cout << "samples: " << result.samples.size()
            << ", termination: " << to_string(result.termination);
  if (result.critical_norm)
    std::cout << ", critical |S| = " << format_real(*result.critical_norm);
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete elastic rod helix stability explorer"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir;
  int workers_flag = 0;
  app.add_option("--config", config_path, "config file (key = value sections)");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--workers", workers_flag, "worker thread count override");

  auto* cmd_gradcheck =
      app.add_subcommand("gradcheck", "finite-difference force/jacobian check");

  auto* cmd_sweep = app.add_subcommand("sweep", "sweep one search direction");
  std::string dir_text = "0.594,0.698,0.4";
  cmd_sweep->add_option("--dir", dir_text, "search direction sx,sy,sz");

  auto* cmd_boundary =
      app.add_subcommand("boundary", "stability boundary over many directions");
  int dir_count = 64;
  cmd_boundary->add_option("--dirs", dir_count, "number of directions");

  auto* cmd_disturb = app.add_subcommand("disturb", "disturbance study curves");
  std::string kind_text = "poisson";
  std::string values_text;
  std::string disturb_dir_text;
  cmd_disturb->add_option("--kind", kind_text,
                          "poisson|youngs|gravito_bending|speed|jitter");
  cmd_disturb->add_option("--values", values_text, "comma-separated values")
      ->required();
  cmd_disturb->add_option("--dir", disturb_dir_text,
                          "search direction (default 1/sqrt(3)*[1,1,1])");

  auto* cmd_helix = app.add_subcommand("helix", "settle one parameter point");
  Real kappa = 0, tau = 0, omega = 0;
  cmd_helix->add_option("--kappa", kappa, "nondimensional curvature");
  cmd_helix->add_option("--tau", tau, "nondimensional torsion");
  cmd_helix->add_option("--omega", omega, "nondimensional twisting moment");

  CLI11_PARSE(app, argc, argv);

  RunConfig config;
  try {
    config = config_path.empty() ? default_config()
                                 : parse_config_file(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const int workers = resolve_workers(config, workers_flag);
  const uint64_t fingerprint = config_fingerprint(config);

  try {
    if (cmd_gradcheck->parsed()) return run_gradcheck(config);

    if (cmd_sweep->parsed()) {
      const Vec3 dir = parse_direction(dir_text);
      const SweepResult result = sweep_ray(dir, config.material, config.sweep);
      auto out = open_output(config, "sweep.csv");
      write_sweep_csv(out, result, fingerprint, config.sweep.seed);
      print_sweep_summary(result);
      return kExitOk;
    }

    if (cmd_boundary->parsed()) {
      if (dir_count < 1) throw ConfigError("--dirs must be >= 1");
      const auto dirs = sample_directions(dir_count);
      const BoundarySurface surface =
          generate_boundary(dirs, config.material, config.sweep, workers);
      auto out = open_output(config, "boundary.csv");
      write_boundary_csv(out, surface, config.sweep.seed);
      const auto swept = std::count_if(
          surface.points.begin(), surface.points.end(),
          [](const BoundaryPoint& p) { return !p.reflected; });
      std::cout << "swept points: " << swept
                << ", total with reflections: " << surface.points.size()
                << ", warnings: " << surface.failures.size() << "\n";
      return kExitOk;
    }

    if (cmd_disturb->parsed()) {
      const auto kind = disturbance_kind_from(kind_text);
      if (!kind) throw ConfigError("unknown disturbance kind '" + kind_text + "'");
      std::vector<Real> values;
      std::istringstream vs(values_text);
      std::string tok;
      while (std::getline(vs, tok, ',')) values.push_back(std::stod(tok));
      if (values.empty()) throw ConfigError("--values must be non-empty");
      const Vec3 dir = disturb_dir_text.empty()
                           ? Vec3(1, 1, 1).normalized()
                           : parse_direction(disturb_dir_text);
      const auto curves = disturbance_sweep(*kind, values, dir,
                                            config.material, config.sweep,
                                            workers);
      auto out = open_output(config,
                             std::string("disturb_") + to_string(*kind) +
                                 ".csv");
      write_disturbance_csv(out, *kind, curves, fingerprint,
                            config.sweep.seed);
      for (const auto& c : curves) {
        std::cout << "value " << format_real(c.value) << ": ";
        print_sweep_summary(c.sweep);
      }
      return kExitOk;
    }

    if (cmd_helix->parsed()) {
      if (kappa < 0) throw ConfigError("--kappa must be >= 0");
      const HelixPoint p{kappa, tau, omega};
      const RodState state =
          settle_helix_point(p, config.material, config.sweep);
      auto out = open_output(config, "state.txt");
      write_rod_state(out, state, fingerprint, config.sweep.seed);
      std::cout << "helix error e = " << format_real(helix_error(state, p))
                << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kExitSimulation;
  }
  return kExitOk;
}
