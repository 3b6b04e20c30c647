#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace spdc {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// CODATA 2018 values (SI).
struct PhysicalConstants {
  static constexpr double c = 299792458.0;           // m/s
  static constexpr double hbar = 1.054571817e-34;    // J s
  static constexpr double mu0 = 1.25663706212e-6;    // H/m
  static constexpr double eps0 = 8.8541878128e-12;   // F/m
  static constexpr double z0() { return mu0 * c; }   // vacuum impedance, ohm
};

inline double omega_from_wavelength(double lambda_m) {
  return 2.0 * kPi * PhysicalConstants::c / lambda_m;
}

inline double wavelength_from_omega(double omega) {
  return 2.0 * kPi * PhysicalConstants::c / omega;
}

}  // namespace spdc
