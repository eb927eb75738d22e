#pragma once

#include <stdexcept>
#include <string>

namespace helixstab {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rod discretization too coarse (fewer than 3 edges).
struct InvalidDiscretization : SimulationError {
  using SimulationError::SimulationError;
};

// Zero-length edge or anti-parallel adjacent tangents.
struct DegenerateGeometry : SimulationError {
  using SimulationError::SimulationError;
};

// Newton failed to reach the residual tolerance.
struct SolverDivergence : SimulationError {
  SolverDivergence(const std::string& what, double residual)
      : SimulationError(what), last_residual(residual) {}
  double last_residual = 0.0;
};

// Dynamic settling did not reach quiescence within the step budget.
struct NonEquilibrium : SimulationError {
  using SimulationError::SimulationError;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace helixstab
