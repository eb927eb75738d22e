#pragma once

#include <iosfwd>
#include <string>

#include "helixstab/explorer.hpp"

namespace helixstab {

struct RunConfig {
  MaterialParams material;
  SweepSettings sweep;
  int workers = 0;  // 0 selects the hardware thread count
  std::string output_dir = "out";

  void validate() const;
};

RunConfig default_config();

// Flat key-value text with [section] headers; '#' starts a comment.
// Unknown keys and malformed lines fail with "<path>:<line>: message".
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& name = "<config>");

// Canonical serialization (round-trips through the parser).
std::string canonical_config(const RunConfig& config);
uint64_t config_fingerprint(const RunConfig& config);

// Shortest decimal that restores the exact double (up to 17 significant
// digits), so emitted files are bit-faithful.
std::string format_real(Real v);

// --- sweep records ---
void write_sweep_csv(std::ostream& out, const SweepResult& result,
                     uint64_t fingerprint, uint64_t seed);
SweepResult read_sweep_csv(std::istream& in);

// --- boundary surface ---
void write_boundary_csv(std::ostream& out, const BoundarySurface& surface,
                        uint64_t seed);
BoundarySurface read_boundary_csv(std::istream& in);

// --- disturbance curve families ---
void write_disturbance_csv(std::ostream& out, DisturbanceKind kind,
                           const std::vector<DisturbanceCurve>& curves,
                           uint64_t fingerprint, uint64_t seed);
std::vector<DisturbanceCurve> read_disturbance_csv(std::istream& in);

// --- rod state dumps ---
struct RodStateDump {
  uint64_t fingerprint = 0;
  uint64_t seed = 0;
  Real length = 0.0;
  Mat3X nodes;
  VecX thetas;
};
void write_rod_state(std::ostream& out, const RodState& state,
                     uint64_t fingerprint, uint64_t seed);
RodStateDump read_rod_state(std::istream& in);

}  // namespace helixstab
