#pragma once

// Classical pump propagation and linear transmission of the stack.
//
// In medium l the field is  F e^{ik(z - z_ref)} + B e^{-ik(z - z_ref)}  with z_ref the
// left boundary of the medium (z_1 for the input ambient). Continuity of E and H at
// normal incidence gives a scalar 2x2 interface matrix per frequency.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "structure.hpp"

namespace spdc {

struct PumpSpec {
  double omega0 = 0.0;           // rad/s
  double sigma = 0.0;            // rad/s, |A|^2 ~ exp(-(w - w0)^2 / sigma^2)
  double energy_per_area = 0.0;  // J/m^2
  Pol polarization = Pol::Y;
  Dir side = Dir::F;             // F: incident from the left, B: from the right

  /// sigma from the intensity FWHM expressed in vacuum wavelength.
  static double sigma_from_fwhm_wavelength(double lambda0, double fwhm_lambda) {
    const double fwhm_omega = 2.0 * kPi * PhysicalConstants::c * fwhm_lambda / (lambda0 * lambda0);
    return fwhm_omega / (2.0 * std::sqrt(std::log(2.0)));
  }

  void validate() const {
    if (!(omega0 > 0.0)) throw ConfigError("pump omega0 must be positive");
    if (!(sigma > 0.0)) throw ConfigError("pump sigma_p must be positive");
    if (!(energy_per_area > 0.0)) throw ConfigError("pump energy_per_area must be positive");
  }

  /// Incident spectral amplitude, V/m per rad/s:
  /// sqrt( sqrt(mu0 / (eps0 pi)) E / (pi sigma) ) exp(-(w - w0)^2 / (2 sigma^2)).
  /// Normalisation: integral |A|^2 dw = Z0 E / pi, i.e. E = (eps0 c / 2) integral |E+(t)|^2 dt.
  double input_amplitude(double omega) const {
    using P = PhysicalConstants;
    const double pre = std::sqrt(std::sqrt(P::mu0 / (P::eps0 * kPi)) * energy_per_area / (kPi * sigma));
    const double x = (omega - omega0) / sigma;
    return pre * std::exp(-0.5 * x * x);
  }

  /// Beyond this detuning the incident amplitude is below 1e-30 of its peak.
  bool negligible(double omega) const { return std::abs(omega - omega0) > 11.75 * sigma; }
};

struct ModeAmplitudes {
  cplx forward{};
  cplx backward{};
};

using Transfer2 = std::array<std::array<cplx, 2>, 2>;

inline Transfer2 mul(const Transfer2& a, const Transfer2& b) {
  Transfer2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

/// Maps (F, B) of medium l-1 at z_l to (F, B) of medium l at z_l. n_prev/n_next are the indices.
inline Transfer2 interface_matrix(double n_prev, double n_next) {
  if (!(n_prev > 0.0) || !(n_next > 0.0)) throw SingularMatrix("interface with non-positive index");
  const double s = (n_next + n_prev) / (2.0 * n_next), d = (n_next - n_prev) / (2.0 * n_next);
  return {{{s, d}, {d, s}}};
}

inline Transfer2 propagation_matrix(double k, double length) {
  return {{{std::exp(kI * k * length), 0.0}, {0.0, std::exp(-kI * k * length)}}};
}

/// Per-medium amplitudes of a unit-normalised linear solution at one frequency.
struct LinearSolution {
  std::vector<ModeAmplitudes> media;  // size N+2, referenced to each medium's left boundary
};

/// Solves the stack for incident amplitude `amplitude` from `side`, at omega.
inline LinearSolution solve_linear(const StructureSpec& s, double omega, cplx amplitude, Dir side) {
  const int n_media = s.media_count();
  std::vector<double> n(n_media), k(n_media);
  for (int l = 0; l < n_media; ++l) {
    n[l] = s.medium(l).refractive_index(omega);
    k[l] = omega * n[l] / PhysicalConstants::c;
  }
  // Transfer from medium 0 at z_1 to medium l at z_l.
  std::vector<Transfer2> to(n_media);
  to[0] = {{{1.0, 0.0}, {0.0, 1.0}}};
  for (int l = 1; l < n_media; ++l) {
    const Transfer2 prop = propagation_matrix(k[l - 1], s.length(l - 1));
    to[l] = mul(interface_matrix(n[l - 1], n[l]), mul(prop, to[l - 1]));
  }
  const Transfer2& m = to[n_media - 1];
  cplx f0, b0;
  if (side == Dir::F) {
    f0 = amplitude;
    b0 = -m[1][0] * amplitude / m[1][1];
  } else {
    f0 = 0.0;
    b0 = amplitude / m[1][1];
  }
  LinearSolution out;
  out.media.resize(n_media);
  for (int l = 0; l < n_media; ++l) {
    out.media[l].forward = to[l][0][0] * f0 + to[l][0][1] * b0;
    out.media[l].backward = to[l][1][0] * f0 + to[l][1][1] * b0;
  }
  if (side == Dir::F) out.media[n_media - 1].backward = 0.0;
  else out.media[0].forward = 0.0;
  return out;
}

/// Pump amplitudes in every medium for every frequency of a grid.
class PumpField {
 public:
  PumpField() = default;
  PumpField(std::vector<double> grid, std::vector<LinearSolution> sol, Pol pol)
      : grid_(std::move(grid)), sol_(std::move(sol)), pol_(pol) {
    for (std::size_t j = 0; j < grid_.size(); ++j) lookup_.emplace(grid_[j], static_cast<int>(j));
  }

  const std::vector<double>& grid() const { return grid_; }
  Pol polarization() const { return pol_; }
  int size() const { return static_cast<int>(grid_.size()); }

  int index_of(double omega) const {
    auto it = lookup_.lower_bound(omega * (1.0 - 1e-12));
    if (it == lookup_.end() || std::abs(it->first - omega) > 1e-12 * omega)
      throw OutOfWindow("pump frequency not on the pump grid");
    return it->second;
  }

  const ModeAmplitudes& at(int medium, int grid_index) const { return sol_.at(grid_index).media.at(medium); }
  const ModeAmplitudes& at(int medium, double omega) const { return at(medium, index_of(omega)); }

  /// Amplitude of direction g and polarisation gamma (zero for the unused polarisation).
  cplx amplitude(int medium, double omega, Dir g, Pol gamma) const {
    if (gamma != pol_) return 0.0;
    const auto& a = at(medium, omega);
    return g == Dir::F ? a.forward : a.backward;
  }

  /// Scales every amplitude (used for linearity checks).
  PumpField scaled(double factor) const {
    PumpField p = *this;
    for (auto& s : p.sol_)
      for (auto& m : s.media) {
        m.forward *= factor;
        m.backward *= factor;
      }
    return p;
  }

 private:
  std::vector<double> grid_;
  std::vector<LinearSolution> sol_;
  Pol pol_ = Pol::Y;
  std::map<double, int> lookup_;
};

/// Sorted grid of unique values (relative tolerance 1e-12).
inline std::vector<double> unique_grid(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || std::abs(x - out.back()) > 1e-12 * std::abs(x)) out.push_back(x);
  return out;
}

inline PumpField propagate_pump(const StructureSpec& s, const PumpSpec& pump, std::vector<double> grid) {
  pump.validate();
  grid = unique_grid(std::move(grid));
  std::vector<LinearSolution> sol(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (pump.negligible(grid[j])) {
      sol[j].media.assign(s.media_count(), ModeAmplitudes{});
      continue;
    }
    sol[j] = solve_linear(s, grid[j], pump.input_amplitude(grid[j]), pump.side);
  }
  return PumpField(std::move(grid), std::move(sol), pump.polarization);
}

struct LinearResponse {
  cplx t{};
  cplx r{};
  double T = 0.0;
  double R = 0.0;
};

/// Field transmission/reflection for incidence from `side` at omega.
inline LinearResponse linear_transmission(const StructureSpec& s, double omega, Dir side = Dir::F) {
  const auto sol = solve_linear(s, omega, 1.0, side);
  const int last = s.media_count() - 1;
  const double n_in = s.medium(side == Dir::F ? 0 : last).refractive_index(omega);
  const double n_out = s.medium(side == Dir::F ? last : 0).refractive_index(omega);
  LinearResponse out;
  if (side == Dir::F) {
    out.t = sol.media[last].forward;
    out.r = sol.media[0].backward;
  } else {
    out.t = sol.media[0].backward;
    // Reflected wave leaves medium N+1 at z_{N+1}.
    out.r = sol.media[last].forward;
  }
  out.T = std::norm(out.t) * n_out / n_in;
  out.R = std::norm(out.r);
  return out;
}

/// Largest relative mismatch of E and H across all boundaries of a linear solution.
inline double continuity_residual(const StructureSpec& s, double omega, const LinearSolution& sol) {
  double worst = 0.0;
  for (int l = 1; l < s.media_count(); ++l) {
    const double nl = s.medium(l - 1).refractive_index(omega), nr = s.medium(l).refractive_index(omega);
    const double kl = omega * nl / PhysicalConstants::c;
    const double len = s.length(l - 1);
    const cplx fl = sol.media[l - 1].forward * std::exp(kI * kl * len);
    const cplx bl = sol.media[l - 1].backward * std::exp(-kI * kl * len);
    const cplx fr = sol.media[l].forward, br = sol.media[l].backward;
    const double scale_e = std::abs(fl) + std::abs(bl) + std::abs(fr) + std::abs(br);
    if (scale_e == 0.0) continue;
    const double re = std::abs((fl + bl) - (fr + br)) / scale_e;
    const double rh = std::abs(nl * (fl - bl) - nr * (fr - br)) / (nl * scale_e);
    worst = std::max({worst, re, rh});
  }
  return worst;
}

}  // namespace spdc
