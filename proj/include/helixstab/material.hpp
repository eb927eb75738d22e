#pragma once

#include <cmath>

#include "helixstab/errors.hpp"
#include "helixstab/types.hpp"

namespace helixstab {

// Isotropic circular-cross-section rod material and geometry, SI units.
struct MaterialParams {
  Real youngs_modulus = 1.12e9;   // E, Pa
  Real poisson_ratio = 0.33;      // nu, dimensionless
  Real density = 1180.0;          // rho, kg/m^3
  Real rod_radius = 7.81e-4;      // h, m
  Real length = 1.0;              // L, m
  Real gravity = 9.81;            // g, m/s^2 (may be 0)

  Real axial_stiffness() const {  // k_s = E*pi*h^2
    return youngs_modulus * M_PI * rod_radius * rod_radius;
  }
  Real bending_stiffness() const {  // k_b = E*pi*h^4/4
    const Real h2 = rod_radius * rod_radius;
    return youngs_modulus * M_PI * h2 * h2 / 4.0;
  }
  Real twisting_stiffness() const {  // k_t = E*pi*h^4/(4(1+nu))
    return bending_stiffness() / (1.0 + poisson_ratio);
  }
  Real stiffness_ratio() const {  // c = k_t/k_b = 1/(1+nu)
    return 1.0 / (1.0 + poisson_ratio);
  }
  Real cross_section_area() const { return M_PI * rod_radius * rod_radius; }
  Real linear_density() const { return density * cross_section_area(); }

  // Gravito-bending length (h^2 E / (8 rho g))^(1/3).
  Real gravito_bending_length() const {
    if (gravity <= 0.0) return std::numeric_limits<Real>::infinity();
    const Real h2 = rod_radius * rod_radius;
    return std::cbrt(h2 * youngs_modulus / (8.0 * density * gravity));
  }

  void validate() const {
    if (!(youngs_modulus > 0)) throw ConfigError("youngs_modulus must be > 0");
    if (!(density > 0)) throw ConfigError("density must be > 0");
    if (!(rod_radius > 0)) throw ConfigError("rod_radius must be > 0");
    if (!(length > 0)) throw ConfigError("length must be > 0");
    if (!(poisson_ratio > -1.0 && poisson_ratio <= 0.5))
      throw ConfigError("poisson_ratio must be in (-1, 0.5]");
    if (gravity < 0) throw ConfigError("gravity must be >= 0");
  }
};

}  // namespace helixstab
