#pragma once

// Spectral basis, per-photon amplitudes, nonlinear coupling and the closed-form
// particular solution of the first-order Heisenberg equations inside a layer.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "linear_optics.hpp"
#include "structure.hpp"
#include "types.hpp"

namespace spdc {

/// Uniform top-hat bins on [omega_min, omega_max]; f_k = 1/sqrt(d_omega) on bin k.
class SpectralBasis {
 public:
  SpectralBasis(double omega_min, double omega_max, int bins)
      : omega_min_(omega_min), omega_max_(omega_max), bins_(bins) {
    if (!(omega_min > 0.0) || !(omega_max > omega_min)) throw ConfigError("invalid spectral window");
    if (bins < 1) throw ConfigError("spectral basis needs at least one bin");
    edges_.resize(bins + 1);
    for (int k = 0; k <= bins; ++k) edges_[k] = omega_min + (omega_max - omega_min) * k / bins;
    edges_[bins] = omega_max;
  }

  /// Window given as fractions of a reference frequency.
  static SpectralBasis relative(double omega_ref, double lo, double hi, int bins) {
    return SpectralBasis(lo * omega_ref, hi * omega_ref, bins);
  }

  int size() const { return bins_; }
  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  double edge(int k) const { return edges_.at(k); }
  double center(int k) const { return 0.5 * (edges_.at(k) + edges_.at(k + 1)); }
  double width(int k) const { return edges_.at(k + 1) - edges_.at(k); }
  std::vector<double> centers() const {
    std::vector<double> c(bins_);
    for (int k = 0; k < bins_; ++k) c[k] = center(k);
    return c;
  }

  /// Value of f_k at omega.
  double basis_value(int k, double omega) const {
    return (omega >= edges_[k] && omega < edges_[k + 1]) ? 1.0 / std::sqrt(width(k)) : 0.0;
  }

  /// Bin containing omega, -1 outside the window.
  int bin_of(double omega) const {
    if (omega < omega_min_ || omega > omega_max_) return -1;
    int k = static_cast<int>((omega - omega_min_) / (omega_max_ - omega_min_) * bins_);
    return std::min(k, bins_ - 1);
  }

 private:
  double omega_min_, omega_max_;
  int bins_;
  std::vector<double> edges_;
};

/// All pump frequencies needed to couple the two bases (bin-centre sums).
inline std::vector<double> pump_grid(const SpectralBasis& signal, const SpectralBasis& idler) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(signal.size()) * idler.size());
  for (int k = 0; k < signal.size(); ++k)
    for (int n = 0; n < idler.size(); ++n) g.push_back(signal.center(k) + idler.center(n));
  return unique_grid(std::move(g));
}

/// Field per photon: sqrt(hbar w / (4 pi eps0 c n(w) A)).
inline double photon_amplitude_tau(const MaterialModel& m, double omega, double area = 1.0) {
  using P = PhysicalConstants;
  if (!(area > 0.0)) throw ConfigError("transverse area must be positive");
  return std::sqrt(P::hbar * omega / (4.0 * kPi * P::eps0 * P::c * m.refractive_index(omega) * area));
}

/// Nonlinear coupling T_g^{alpha beta gamma,(l)}(w_s, w_i), units 1/m per rad/s.
/// alpha is the signal polarisation, beta the idler polarisation.
inline cplx nonlinear_coupling_T(const StructureSpec& s, const PumpField& pump, int l, Dir g, Pol gamma,
                                 Pol alpha, Pol beta, double omega_s, double omega_i, double area = 1.0) {
  using P = PhysicalConstants;
  const MaterialModel& m = s.medium(l);
  const double chi = m.chi2_effective(gamma, alpha, beta);
  if (chi == 0.0) return 0.0;
  const cplx ap = pump.amplitude(l, omega_s + omega_i, g, gamma);
  if (ap == cplx{}) return 0.0;
  const double tau_s = photon_amplitude_tau(m, omega_s, area);
  const double tau_i = photon_amplitude_tau(m, omega_i, area);
  return (4.0 * kI * kPi * P::eps0 * area / P::hbar) * tau_s * tau_i * chi * double(s.poling(l)) * std::conj(ap);
}

struct PhaseValue {
  cplx phi{};
  cplx dphi_dz{};
};

/// Below this |dk (z - z_a)| the bracket (e^{-i dk u} - 1)/dk uses its Taylor series.
inline constexpr double kSeriesThreshold = 1e-6;

/// (e^{-i dk u} - 1) / dk, evaluated without cancellation.
inline cplx phase_bracket(double dk, double u) {
  const double x = dk * u;
  if (std::abs(x) < kSeriesThreshold) return -kI * u * (1.0 - 0.5 * kI * x);
  const double sh = std::sin(0.5 * x);
  return cplx(-2.0 * sh * sh, -std::sin(x)) / dk;
}

/// Wave numbers entering the particular solution of one emitter/partner channel.
struct ChannelWaves {
  double k_emitter = 0.0;              // signed, emitter direction a
  double k_partner = 0.0;              // signed, partner direction b
  std::array<double, 2> k_pump{};      // signed, indexed by pump direction g
  std::array<cplx, 2> coupling{};      // T_g
};

/// Closed-form particular solution Phi_{ab} inside layer l and its z-derivative.
/// Reference point z_a is the left boundary for a = F and the right boundary for a = B;
/// the backward phase factor is (k_p - k_partner) L_l.
inline PhaseValue phase_function(const ChannelWaves& w, Dir a, double z, double z_left, double length) {
  const double za = a == Dir::F ? z_left : z_left + length;
  const double u = z - za;
  const double sgn = dir_sign(a);
  PhaseValue out;
  for (int g = 0; g < 2; ++g) {
    const cplx t = w.coupling[g];
    if (t == cplx{}) continue;
    const double dk = w.k_pump[g] - w.k_emitter - w.k_partner;
    const double phase = a == Dir::F ? 0.0 : (w.k_pump[g] - w.k_partner) * length;
    const cplx pre = t * std::exp(-kI * phase);
    out.phi += kI * sgn * pre * phase_bracket(dk, u);
    out.dphi_dz += sgn * pre * std::exp(-kI * dk * u);
  }
  return out;
}

/// Channel data for emitter `field` (direction a, polarisation pe) and its partner
/// (direction b, polarisation pp) at frequencies (w_e, w_p) in layer l.
inline ChannelWaves channel_waves(const StructureSpec& s, const PumpField& pump, int l, Field field, Dir a,
                                  Dir b, Pol pe, Pol pp, double omega_e, double omega_p, double area = 1.0) {
  const MaterialModel& m = s.medium(l);
  ChannelWaves w;
  w.k_emitter = m.wavenumber(omega_e, a);
  w.k_partner = m.wavenumber(omega_p, b);
  const double wp = omega_e + omega_p;
  const Pol ps = field == Field::Signal ? pe : pp;
  const Pol pi = field == Field::Signal ? pp : pe;
  const double ws = field == Field::Signal ? omega_e : omega_p;
  const double wi = field == Field::Signal ? omega_p : omega_e;
  for (Dir g : kDirs) {
    w.coupling[index(g)] = nonlinear_coupling_T(s, pump, l, g, pump.polarization(), ps, pi, ws, wi, area);
    if (w.coupling[index(g)] != cplx{}) w.k_pump[index(g)] = m.wavenumber(wp, g);
  }
  return w;
}

/// Signal-field phase function Phi_{s,ab}^{alpha beta,(l)}(z, w_s, w_i).
inline PhaseValue phase_functions(const StructureSpec& s, const PumpField& pump, int l, Dir a, Dir b,
                                  Pol alpha, Pol beta, double omega_s, double omega_i, double z) {
  if (l < 1 || l > s.layer_count()) return {};
  if (z < s.z(l) - 1e-18 || z > s.z(l + 1) + 1e-18) return {};
  const auto w = channel_waves(s, pump, l, Field::Signal, a, b, alpha, beta, omega_s, omega_i);
  return phase_function(w, a, z, s.z(l), s.length(l));
}

/// Basis-projected coefficients of Phi* (lambda_E) and dPhi*/dz (lambda_H) for one layer,
/// at both of its boundaries. Rows are emitter bins, columns partner bins.
struct CouplingBlocks {
  Field emitter = Field::Signal;
  bool linear = true;
  // [side][a][b][pe][pp], side 0 = left boundary z_l, 1 = right boundary z_{l+1}.
  std::array<Eigen::MatrixXcd, 32> lambda_e;
  std::array<Eigen::MatrixXcd, 32> lambda_h;

  static constexpr int slot(int side, Dir a, Dir b, Pol pe, Pol pp) {
    return (((side * 2 + index(a)) * 2 + index(b)) * 2 + index(pe)) * 2 + index(pp);
  }
  const Eigen::MatrixXcd& e(int side, Dir a, Dir b, Pol pe, Pol pp) const { return lambda_e[slot(side, a, b, pe, pp)]; }
  const Eigen::MatrixXcd& h(int side, Dir a, Dir b, Pol pe, Pol pp) const { return lambda_h[slot(side, a, b, pe, pp)]; }
};

/// Midpoint projection: lambda[k,n] = Phi*(z, w_k, w_n) sqrt(dw_k dw_n).
inline CouplingBlocks project_to_basis(const StructureSpec& s, int l, const SpectralBasis& emitter_basis,
                                       const SpectralBasis& partner_basis, const PumpField& pump,
                                       Field emitter = Field::Signal) {
  const int ke = emitter_basis.size(), kp = partner_basis.size();
  CouplingBlocks out;
  out.emitter = emitter;
  for (auto& m : out.lambda_e) m = Eigen::MatrixXcd::Zero(ke, kp);
  for (auto& m : out.lambda_h) m = Eigen::MatrixXcd::Zero(ke, kp);
  if (l < 1 || l > s.layer_count() || s.medium(l).is_linear()) return out;
  out.linear = false;
  const double zl = s.z(l), len = s.length(l);
  for (int k = 0; k < ke; ++k) {
    const double we = emitter_basis.center(k);
    for (int n = 0; n < kp; ++n) {
      const double wp = partner_basis.center(n);
      const double weight = std::sqrt(emitter_basis.width(k) * partner_basis.width(n));
      for (Dir a : kDirs)
        for (Dir b : kDirs)
          for (Pol pe : kPols)
            for (Pol pp : kPols) {
              const Pol ps = emitter == Field::Signal ? pe : pp;
              const Pol pi = emitter == Field::Signal ? pp : pe;
              if (s.medium(l).chi2_effective(pump.polarization(), ps, pi) == 0.0) continue;
              const auto w = channel_waves(s, pump, l, emitter, a, b, pe, pp, we, wp);
              if (w.coupling[0] == cplx{} && w.coupling[1] == cplx{}) continue;
              for (int side = 0; side < 2; ++side) {
                const auto v = phase_function(w, a, side == 0 ? zl : zl + len, zl, len);
                out.lambda_e[CouplingBlocks::slot(side, a, b, pe, pp)](k, n) = std::conj(v.phi) * weight;
                out.lambda_h[CouplingBlocks::slot(side, a, b, pe, pp)](k, n) = std::conj(v.dphi_dz) * weight;
              }
            }
    }
  }
  return out;
}

}  // namespace spdc
