#include "helixstab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace helixstab {

std::string format_real(Real v) {
  char buf[40];
  // Shortest representation that parses back exactly.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void RunConfig::validate() const {
  material.validate();
  if (sweep.n < 3) throw ConfigError("segments must be >= 3");
  if (!(sweep.step > 0)) throw ConfigError("step must be > 0");
  if (!(sweep.max_norm > sweep.step))
    throw ConfigError("max_norm must exceed step");
  if (!(sweep.error_abs > 0)) throw ConfigError("error_abs must be > 0");
  if (!(sweep.jump_factor > 1)) throw ConfigError("jump_factor must be > 1");
  if (!(sweep.speed > 0)) throw ConfigError("speed must be > 0");
  if (sweep.jitter < 0) throw ConfigError("jitter must be >= 0");
  if (sweep.perturbation < 0) throw ConfigError("perturbation must be >= 0");
  if (!(sweep.solver.dt > 0)) throw ConfigError("dt must be > 0");
  if (sweep.solver.newton_max_iters < 1)
    throw ConfigError("newton_max_iters must be >= 1");
  if (sweep.solver.settle_max_steps < 1)
    throw ConfigError("settle_max_steps must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
}

RunConfig default_config() { return RunConfig{}; }

namespace {

struct KeyRef {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

Real parse_real(const std::string& s) {
  size_t pos = 0;
  const Real v = std::stod(s, &pos);
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

int64_t parse_int(const std::string& s) {
  size_t pos = 0;
  const int64_t v = std::stoll(s, &pos, 10);
  if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

// Section.key registry binding the config fields to their textual form.
std::map<std::string, KeyRef> key_table(RunConfig& c) {
  std::map<std::string, KeyRef> t;
  auto real_ref = [&t](const std::string& name, Real& field) {
    t[name] = {[&field] { return format_real(field); },
               [&field](const std::string& s) { field = parse_real(s); }};
  };
  auto int_ref = [&t](const std::string& name, int& field) {
    t[name] = {[&field] { return std::to_string(field); },
               [&field](const std::string& s) {
                 field = static_cast<int>(parse_int(s));
               }};
  };
  auto bool_ref = [&t](const std::string& name, bool& field) {
    t[name] = {[&field] { return field ? std::string("true") : "false"; },
               [&field](const std::string& s) { field = parse_bool(s); }};
  };
  auto u64_ref = [&t](const std::string& name, uint64_t& field) {
    t[name] = {[&field] { return std::to_string(field); },
               [&field](const std::string& s) {
                 field = static_cast<uint64_t>(std::stoull(s));
               }};
  };

  real_ref("material.youngs_modulus", c.material.youngs_modulus);
  real_ref("material.poisson_ratio", c.material.poisson_ratio);
  real_ref("material.density", c.material.density);
  real_ref("material.rod_radius", c.material.rod_radius);
  real_ref("material.length", c.material.length);
  real_ref("material.gravity", c.material.gravity);

  int_ref("rod.segments", c.sweep.n);

  real_ref("solver.dt", c.sweep.solver.dt);
  real_ref("solver.newton_tol", c.sweep.solver.newton_tol);
  int_ref("solver.newton_max_iters", c.sweep.solver.newton_max_iters);
  real_ref("solver.settle_velocity_tol", c.sweep.solver.settle_velocity_tol);
  bool_ref("solver.gravity_enabled", c.sweep.solver.gravity_enabled);
  int_ref("solver.settle_max_steps", c.sweep.solver.settle_max_steps);
  real_ref("solver.settle_dt_max_scale", c.sweep.solver.settle_dt_max_scale);

  real_ref("sweep.step", c.sweep.step);
  real_ref("sweep.max_norm", c.sweep.max_norm);
  real_ref("sweep.error_abs", c.sweep.error_abs);
  real_ref("sweep.jump_factor", c.sweep.jump_factor);
  bool_ref("sweep.refine", c.sweep.refine);
  real_ref("sweep.speed", c.sweep.speed);
  real_ref("sweep.damping", c.sweep.damping);
  real_ref("sweep.jitter", c.sweep.jitter);
  real_ref("sweep.perturbation", c.sweep.perturbation);
  u64_ref("sweep.seed", c.sweep.seed);

  int_ref("run.workers", c.workers);
  t["run.output_dir"] = {[&c] { return c.output_dir; },
                         [&c](const std::string& s) { c.output_dir = s; }};
  return t;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig config;
  auto table = key_table(config);

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const std::string& msg) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": " + msg);
    };

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key outside of a [section]");

    const auto it = table.find(section + "." + key);
    if (it == table.end()) fail("unknown key '" + section + "." + key + "'");
    try {
      it->second.set(value);
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }

  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string canonical_config(const RunConfig& config) {
  RunConfig copy = config;
  auto table = key_table(copy);
  std::ostringstream out;
  std::string section;
  for (const auto& [key, ref] : table) {
    const size_t dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << ref.get() << "\n";
  }
  return out.str();
}

uint64_t config_fingerprint(const RunConfig& config) {
  const std::string canon = canonical_config(config);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// CSV / dump formats

namespace {

// Reads "# key=value" style metadata lines.
struct MetaReader {
  std::map<std::string, std::string> fields;
  std::vector<std::string> repeated;  // verbatim '# failure ...' lines

  void consume(std::istream& in, std::string& first_data_line) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line.front() != '#') {
        first_data_line = line;
        return;
      }
      const std::string body = trim(line.substr(1));
      if (body.rfind("failure", 0) == 0) {
        repeated.push_back(body);
        continue;
      }
      std::istringstream parts(body);
      std::string token;
      while (parts >> token) {
        const size_t eq = token.find('=');
        if (eq != std::string::npos)
          fields[token.substr(0, eq)] = token.substr(eq + 1);
      }
    }
    first_data_line.clear();
  }

  std::string need(const std::string& key) const {
    const auto it = fields.find(key);
    if (it == fields.end())
      throw ConfigError("missing metadata field '" + key + "'");
    return it->second;
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result,
                     uint64_t fingerprint, uint64_t seed) {
  char head[128];
  std::snprintf(head, sizeof head,
                "# helixstab sweep v1\n# fingerprint=%016" PRIx64
                " seed=%" PRIu64 "\n",
                fingerprint, seed);
  out << head;
  out << "# direction=" << format_real(result.direction.x()) << ","
      << format_real(result.direction.y()) << ","
      << format_real(result.direction.z()) << "\n";
  out << "# termination=" << to_string(result.termination) << "\n";
  if (result.critical_norm)
    out << "# critical_norm=" << format_real(*result.critical_norm) << "\n";
  if (result.crossing_index >= 0)
    out << "# crossing_index=" << result.crossing_index << "\n";
  out << "norm,error,terminated\n";
  for (size_t i = 0; i < result.samples.size(); ++i) {
    const bool terminal =
        (result.termination == SweepTermination::instability)
            ? static_cast<int>(i) == result.crossing_index
            : i + 1 == result.samples.size();
    out << format_real(result.samples[i].norm) << ","
        << format_real(result.samples[i].error) << "," << (terminal ? 1 : 0)
        << "\n";
  }
}

SweepResult read_sweep_csv(std::istream& in) {
  MetaReader meta;
  std::string line;
  meta.consume(in, line);
  if (line != "norm,error,terminated")
    throw ConfigError("sweep csv: unexpected header '" + line + "'");

  SweepResult result;
  const auto dir = split_csv(meta.need("direction"));
  if (dir.size() != 3) throw ConfigError("sweep csv: bad direction");
  result.direction =
      Vec3(parse_real(dir[0]), parse_real(dir[1]), parse_real(dir[2]));
  const std::string term = meta.need("termination");
  if (term == "instability")
    result.termination = SweepTermination::instability;
  else if (term == "max-norm")
    result.termination = SweepTermination::max_norm_reached;
  else if (term == "solver-failure")
    result.termination = SweepTermination::solver_failure;
  else
    throw ConfigError("sweep csv: unknown termination '" + term + "'");
  if (meta.fields.count("critical_norm"))
    result.critical_norm = parse_real(meta.fields.at("critical_norm"));
  if (meta.fields.count("crossing_index"))
    result.crossing_index =
        static_cast<int>(parse_int(meta.fields.at("crossing_index")));

  int id = 1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 3) throw ConfigError("sweep csv: bad row '" + line + "'");
    result.samples.push_back(
        {parse_real(cols[0]), parse_real(cols[1]), id++});
  }
  return result;
}

void write_boundary_csv(std::ostream& out, const BoundarySurface& surface,
                        uint64_t seed) {
  char head[128];
  std::snprintf(head, sizeof head,
                "# helixstab boundary v1\n# fingerprint=%016" PRIx64
                " seed=%" PRIu64 "\n",
                surface.fingerprint, seed);
  out << head;
  for (const auto& f : surface.failures)
    out << "# failure direction=" << f.index << " reason=" << f.reason << "\n";
  out << "kappa,tau,omega,provenance\n";
  for (const auto& p : surface.points)
    out << format_real(p.kappa) << "," << format_real(p.tau) << ","
        << format_real(p.omega) << ","
        << (p.reflected ? "reflected" : "swept") << "\n";
}

BoundarySurface read_boundary_csv(std::istream& in) {
  MetaReader meta;
  std::string line;
  meta.consume(in, line);
  if (line != "kappa,tau,omega,provenance")
    throw ConfigError("boundary csv: unexpected header '" + line + "'");

  BoundarySurface surface;
  surface.fingerprint =
      std::stoull(meta.need("fingerprint"), nullptr, 16);
  for (const std::string& f : meta.repeated) {
    DirectionFailure failure;
    std::istringstream parts(f);
    std::string token;
    parts >> token;  // "failure"
    while (parts >> token) {
      if (token.rfind("direction=", 0) == 0)
        failure.index = static_cast<int>(parse_int(token.substr(10)));
      else if (token.rfind("reason=", 0) == 0) {
        std::string rest;
        std::getline(parts, rest);
        failure.reason = token.substr(7) + rest;
      }
    }
    surface.failures.push_back(failure);
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4)
      throw ConfigError("boundary csv: bad row '" + line + "'");
    surface.points.push_back({parse_real(cols[0]), parse_real(cols[1]),
                              parse_real(cols[2]), cols[3] == "reflected"});
  }
  return surface;
}

void write_disturbance_csv(std::ostream& out, DisturbanceKind kind,
                           const std::vector<DisturbanceCurve>& curves,
                           uint64_t fingerprint, uint64_t seed) {
  char head[160];
  std::snprintf(head, sizeof head,
                "# helixstab disturb v1\n# fingerprint=%016" PRIx64
                " seed=%" PRIu64 " kind=%s\n",
                fingerprint, seed, to_string(kind));
  out << head;
  for (const auto& c : curves) {
    out << "# curve value=" << format_real(c.value)
        << " termination=" << to_string(c.sweep.termination);
    if (c.sweep.critical_norm)
      out << " critical_norm=" << format_real(*c.sweep.critical_norm);
    out << "\n";
  }
  out << "value,norm,error,terminated\n";
  for (const auto& c : curves) {
    for (size_t i = 0; i < c.sweep.samples.size(); ++i) {
      const bool terminal =
          (c.sweep.termination == SweepTermination::instability)
              ? static_cast<int>(i) == c.sweep.crossing_index
              : i + 1 == c.sweep.samples.size();
      out << format_real(c.value) << ","
          << format_real(c.sweep.samples[i].norm) << ","
          << format_real(c.sweep.samples[i].error) << ","
          << (terminal ? 1 : 0) << "\n";
    }
  }
}

std::vector<DisturbanceCurve> read_disturbance_csv(std::istream& in) {
  std::string line;
  std::vector<DisturbanceCurve> curves;
  // Metadata: "# curve value=... termination=... [critical_norm=...]"
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() != '#') break;
    const std::string body = trim(line.substr(1));
    if (body.rfind("curve ", 0) != 0) continue;
    DisturbanceCurve curve;
    std::istringstream parts(body);
    std::string token;
    while (parts >> token) {
      if (token.rfind("value=", 0) == 0)
        curve.value = parse_real(token.substr(6));
      else if (token.rfind("termination=", 0) == 0) {
        const std::string term = token.substr(12);
        curve.sweep.termination =
            term == "instability" ? SweepTermination::instability
            : term == "max-norm"  ? SweepTermination::max_norm_reached
                                  : SweepTermination::solver_failure;
      } else if (token.rfind("critical_norm=", 0) == 0) {
        curve.sweep.critical_norm = parse_real(token.substr(14));
      }
    }
    curves.push_back(curve);
  }
  if (line != "value,norm,error,terminated")
    throw ConfigError("disturb csv: unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4)
      throw ConfigError("disturb csv: bad row '" + line + "'");
    const Real value = parse_real(cols[0]);
    for (auto& c : curves) {
      if (c.value == value) {
        c.sweep.samples.push_back({parse_real(cols[1]), parse_real(cols[2]),
                                   static_cast<int>(c.sweep.samples.size()) +
                                       1});
        if (cols[3] == "1" &&
            c.sweep.termination == SweepTermination::instability)
          c.sweep.crossing_index =
              static_cast<int>(c.sweep.samples.size()) - 1;
        break;
      }
    }
  }
  return curves;
}

void write_rod_state(std::ostream& out, const RodState& state,
                     uint64_t fingerprint, uint64_t seed) {
  char head[128];
  std::snprintf(head, sizeof head,
                "# helixstab rodstate v1\n# fingerprint=%016" PRIx64
                " seed=%" PRIu64 "\n",
                fingerprint, seed);
  out << head;
  out << "# n=" << state.num_edges()
      << " length=" << format_real(state.rest_edge_len.sum()) << "\n";
  for (int i = 0; i < state.num_nodes(); ++i)
    out << "node " << i << " " << format_real(state.nodes(0, i)) << " "
        << format_real(state.nodes(1, i)) << " "
        << format_real(state.nodes(2, i)) << "\n";
  for (int i = 0; i < state.num_edges(); ++i)
    out << "theta " << i << " " << format_real(state.thetas(i)) << "\n";
}

RodStateDump read_rod_state(std::istream& in) {
  MetaReader meta;
  std::string line;
  meta.consume(in, line);

  RodStateDump dump;
  dump.fingerprint = std::stoull(meta.need("fingerprint"), nullptr, 16);
  dump.seed = std::stoull(meta.need("seed"));
  dump.length = parse_real(meta.need("length"));
  const int n = static_cast<int>(parse_int(meta.need("n")));
  dump.nodes.resize(3, n + 1);
  dump.thetas.resize(n);

  auto handle = [&](const std::string& row) {
    if (trim(row).empty()) return;
    std::istringstream parts(row);
    std::string kind;
    int index;
    parts >> kind >> index;
    if (kind == "node") {
      Real x, y, z;
      parts >> x >> y >> z;
      dump.nodes.col(index) = Vec3(x, y, z);
    } else if (kind == "theta") {
      Real v;
      parts >> v;
      dump.thetas(index) = v;
    } else {
      throw ConfigError("rodstate: unexpected row '" + row + "'");
    }
  };
  handle(line);
  while (std::getline(in, line)) handle(line);
  return dump;
}

}  // namespace helixstab
