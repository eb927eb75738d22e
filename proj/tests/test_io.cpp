#include <doctest.h>

#include <sstream>

#include "helixstab/io.hpp"
#include "oracles.hpp"

using namespace helixstab;

TEST_CASE("config text parses into the expected fields") {
  const std::string text = R"(
# sample configuration
[material]
youngs_modulus = 67.5e9
poisson_ratio = 0.33
density = 6450
rod_radius = 0.00079375
length = 0.5
gravity = 9.81

[rod]
segments = 40

[sweep]
step = 0.1
seed = 7

[run]
workers = 2
output_dir = results
)";
  const RunConfig c = parse_config_text(text);
  CHECK(c.material.youngs_modulus == 67.5e9);
  CHECK(c.material.length == 0.5);
  CHECK(c.sweep.n == 40);
  CHECK(c.sweep.step == 0.1);
  CHECK(c.sweep.seed == 7);
  CHECK(c.workers == 2);
  CHECK(c.output_dir == "results");
  // Untouched keys keep their defaults.
  CHECK(c.sweep.max_norm == 20.0);
}

TEST_CASE("config errors carry line numbers") {
  auto message_of = [](const std::string& text) {
    try {
      parse_config_text(text, "test.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  CHECK(message_of("[material]\nbogus_key = 3\n").find("test.ini:2") == 0);
  CHECK(message_of("youngs = 1\n").find("test.ini:1") == 0);
  CHECK(message_of("[material]\nyoungs_modulus = abc\n").find("test.ini:2") ==
        0);
  CHECK(message_of("[material]\npoisson_ratio = 0.7\n").find("poisson") !=
        std::string::npos);
}

TEST_CASE("canonical config round-trips") {
  RunConfig c;
  c.material.length = 0.5;
  c.sweep.step = 0.07;
  c.sweep.seed = 1234567;
  c.workers = 3;
  const std::string canon = canonical_config(c);
  const RunConfig back = parse_config_text(canon);
  CHECK(canonical_config(back) == canon);
  CHECK(config_fingerprint(back) == config_fingerprint(c));

  RunConfig other = c;
  other.sweep.step = 0.08;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
}

TEST_CASE("real serialization restores doubles bit-exactly") {
  oracles::Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    Real v = rng.sym() * std::pow(10.0, static_cast<int>(rng.sym() * 20));
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
  CHECK(format_real(0.0) == "0");
  CHECK(std::strtod(format_real(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("sweep csv round-trips") {
  SweepResult r;
  r.direction = Vec3(0.594, 0.698, 0.4).normalized();
  r.samples = {{0.05, 1e-4, 1}, {0.1, 2.3e-4, 2}, {0.15, 0.31, 3}};
  r.termination = SweepTermination::instability;
  r.critical_norm = 0.13125;
  r.crossing_index = 2;

  std::stringstream buf;
  write_sweep_csv(buf, r, 0xabcdef12u, 42);
  const SweepResult back = read_sweep_csv(buf);
  CHECK((back.direction - r.direction).norm() == 0.0);
  CHECK(back.termination == r.termination);
  CHECK(back.critical_norm == r.critical_norm);
  CHECK(back.crossing_index == r.crossing_index);
  REQUIRE(back.samples.size() == r.samples.size());
  for (size_t i = 0; i < r.samples.size(); ++i) {
    CHECK(back.samples[i].norm == r.samples[i].norm);
    CHECK(back.samples[i].error == r.samples[i].error);
  }
}

TEST_CASE("boundary csv round-trips including failures") {
  BoundarySurface s;
  s.fingerprint = 0x123456789abcdef0ULL;
  s.points = append_reflections({{1.25, 0.5, -0.75, false}});
  s.failures = {{7, "max-norm"}};

  std::stringstream buf;
  write_boundary_csv(buf, s, 9);
  const BoundarySurface back = read_boundary_csv(buf);
  CHECK(back.fingerprint == s.fingerprint);
  REQUIRE(back.points.size() == 2);
  CHECK(back.points[1].reflected);
  CHECK(back.points[1].tau == -0.5);
  CHECK(back.points[1].omega == 0.75);
  REQUIRE(back.failures.size() == 1);
  CHECK(back.failures[0].index == 7);
  CHECK(back.failures[0].reason == "max-norm");
}

TEST_CASE("disturbance csv round-trips") {
  std::vector<DisturbanceCurve> curves(2);
  curves[0].value = 0.2;
  curves[0].sweep.termination = SweepTermination::instability;
  curves[0].sweep.critical_norm = 9.1;
  curves[0].sweep.crossing_index = 1;
  curves[0].sweep.samples = {{0.5, 1e-3, 1}, {1.0, 0.4, 2}};
  curves[1].value = 0.5;
  curves[1].sweep.termination = SweepTermination::max_norm_reached;
  curves[1].sweep.samples = {{0.5, 2e-3, 1}, {1.0, 3e-3, 2}};

  std::stringstream buf;
  write_disturbance_csv(buf, DisturbanceKind::poisson, curves, 1, 42);
  const auto back = read_disturbance_csv(buf);
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == 0.2);
  CHECK(back[0].sweep.critical_norm == 9.1);
  CHECK(back[0].sweep.samples.size() == 2);
  CHECK(back[1].sweep.termination == SweepTermination::max_norm_reached);
  CHECK(back[1].sweep.samples[1].error == 3e-3);
}

TEST_CASE("rod state dump round-trips") {
  MaterialParams params;
  RodState s = make_straight_rod(params, 8);
  s.thetas(3) = 0.25;

  std::stringstream buf;
  write_rod_state(buf, s, 0xfeed, 11);
  const RodStateDump dump = read_rod_state(buf);
  CHECK(dump.fingerprint == 0xfeed);
  CHECK(dump.seed == 11);
  CHECK(dump.length == params.length);
  REQUIRE(dump.nodes.cols() == 9);
  CHECK((dump.nodes - s.nodes).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((dump.thetas - s.thetas).lpNorm<Eigen::Infinity>() == 0.0);
}
