#pragma once

// Brute-force reference: first-order signal amplitudes obtained by marching the coupled-amplitude
// equations through the stack on a fixed z-grid, with E/H continuity applied at every boundary.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "linear_optics.hpp"
#include "observables.hpp"
#include "parallel.hpp"
#include "spectral.hpp"

namespace spdc {

struct OracleResult {
  double step = 0.0;
  Eigen::MatrixXcd G;    // signal outputs (4Ks) x idler^dagger inputs (4Ki), basis coefficients
  Eigen::MatrixXcd F_i;  // physical idler scattering matrix (4Ki x 4Ki)
};

namespace detail {

/// Idler photon amplitudes (forward/backward, left-boundary referenced) in every medium
/// for a unit photon input from `side`.
inline std::vector<std::array<cplx, 2>> idler_modes(const StructureSpec& s, double omega, Dir side) {
  const int media = s.media_count();
  const double n_in = s.medium(side == Dir::F ? 0 : media - 1).refractive_index(omega);
  const LinearSolution sol = solve_linear(s, omega, 1.0 / std::sqrt(n_in), side);
  std::vector<std::array<cplx, 2>> out(media);
  for (int m = 0; m < media; ++m) {
    const double rn = std::sqrt(s.medium(m).refractive_index(omega));
    out[m] = {sol.media[m].forward * rn, sol.media[m].backward * rn};
  }
  return out;
}

/// Signal output (F at z_{N+1}, B at z_1) of one polarisation for one idler^dagger input channel.
/// `steps[m]` sub-steps are used inside layer m.
inline std::array<cplx, 2> march_signal(const StructureSpec& s, const PumpField& pump, double ws, double wi,
                                        Pol alpha, Pol beta, const std::vector<std::array<cplx, 2>>& psi,
                                        const std::vector<int>& steps) {
  const int media = s.media_count();
  // State [F, B] as field values at the current z; particular (sources, zero B at z_1) and homogeneous.
  std::array<cplx, 2> yp{0.0, 0.0}, yh{0.0, 1.0};
  auto jump = [&](int m_prev, int m_next, std::array<cplx, 2> y) {
    const double np = s.medium(m_prev).refractive_index(ws), nn = s.medium(m_next).refractive_index(ws);
    const double kp = ws * np / PhysicalConstants::c, kn = ws * nn / PhysicalConstants::c;
    // E: (F + B)/sqrt(n); H: ik(F - B)/sqrt(n). Source terms of the two directions cancel in H.
    const cplx e = (y[0] + y[1]) / std::sqrt(np);
    const cplx h = kI * kp * (y[0] - y[1]) / std::sqrt(np);
    const cplx sum = e * std::sqrt(nn), diff = h * std::sqrt(nn) / (kI * kn);
    return std::array<cplx, 2>{0.5 * (sum + diff), 0.5 * (sum - diff)};
  };
  for (int m = 1; m < media - 1; ++m) {
    yp = jump(m - 1, m, yp);
    yh = jump(m - 1, m, yh);
    const MaterialModel& mat = s.medium(m);
    const double len = s.length(m);
    const double ks = mat.wavenumber(ws, Dir::F), ki = mat.wavenumber(wi, Dir::F);
    std::array<cplx, 2> acc{0.0, 0.0};
    if (!mat.is_linear()) {
      std::array<cplx, 2> ct{};
      std::array<double, 2> kpump{};
      for (Dir g : kDirs) {
        ct[index(g)] = std::conj(nonlinear_coupling_T(s, pump, m, g, pump.polarization(), alpha, beta, ws, wi));
        kpump[index(g)] = ct[index(g)] == cplx{} ? 0.0 : mat.wavenumber(ws + wi, g);
      }
      if (ct[0] != cplx{} || ct[1] != cplx{}) {
        const int n = steps[m];
        const double h = len / n;
        for (int j = 0; j < n; ++j) {
          const double u = (j + 0.5) * h;  // midpoint, measured from z_m
          cplx drive = 0.0;
          for (int g = 0; g < 2; ++g) drive += ct[g] * std::exp(kI * kpump[g] * u);
          const cplx idler_dag = std::conj(psi[m][0] * std::exp(kI * ki * u) + psi[m][1] * std::exp(-kI * ki * u));
          const cplx src = drive * idler_dag;
          // Integrating factor e^{-i k_a u}: forward source +src, backward -src.
          acc[0] += h * std::exp(-kI * ks * u) * src;
          acc[1] -= h * std::exp(kI * ks * u) * src;
        }
      }
    }
    const cplx pf = std::exp(kI * ks * len), pb = std::exp(-kI * ks * len);
    yp = {pf * (yp[0] + acc[0]), pb * (yp[1] + acc[1])};
    yh = {pf * yh[0], pb * yh[1]};
  }
  yp = jump(media - 2, media - 1, yp);
  yh = jump(media - 2, media - 1, yh);
  if (yh[1] == cplx{}) throw SingularMatrix("oracle shooting: degenerate homogeneous solution");
  const cplx x = -yp[1] / yh[1];
  return {yp[0] + x * yh[0], x};
}

}  // namespace detail

/// Oracle G block and idler scattering at one step size (step <= min layer length / 16).
inline OracleResult reference_G(const StructureSpec& s, const PumpField& pump, const SpectralBasis& bs,
                                const SpectralBasis& bi, double step, int workers = 1) {
  double min_len = s.length(1);
  for (int m = 1; m <= s.layer_count(); ++m) min_len = std::min(min_len, s.length(m));
  if (!(step > 0.0) || step > min_len / 16.0 * (1.0 + 1e-12)) throw StepTooCoarse("oracle step exceeds min layer length / 16");
  std::vector<int> steps(s.media_count(), 0);
  for (int m = 1; m <= s.layer_count(); ++m) steps[m] = static_cast<int>(std::ceil(s.length(m) / step - 1e-9));
  const int ks = bs.size(), ki = bi.size();
  OracleResult r;
  r.step = step;
  r.G = Eigen::MatrixXcd::Zero(4 * ks, 4 * ki);
  r.F_i = Eigen::MatrixXcd::Zero(4 * ki, 4 * ki);
  const int last = s.media_count() - 1;
  for (int n = 0; n < ki; ++n)
    for (Dir d : kDirs) {
      const auto psi = detail::idler_modes(s, bi.center(n), d);
      for (Pol p : kPols) {
        const int col = index(mode_slot(d, p)) * ki + n;
        r.F_i(index(mode_slot(Dir::F, p)) * ki + n, col) = psi[last][0];
        r.F_i(index(mode_slot(Dir::B, p)) * ki + n, col) = psi[0][1];
      }
    }
  parallel_for(ks * ki, workers, [&](int job) {
    const int k = job / ki, n = job % ki;
    const double ws = bs.center(k), wi = bi.center(n);
    const double weight = std::sqrt(bs.width(k) * bi.width(n));
    for (Dir d : kDirs) {
      const auto psi = detail::idler_modes(s, wi, d);
      for (Pol beta : kPols) {
        const int col = index(mode_slot(d, beta)) * ki + n;
        for (Pol alpha : kPols) {
          const auto out = detail::march_signal(s, pump, ws, wi, alpha, beta, psi, steps);
          r.G(index(mode_slot(Dir::F, alpha)) * ks + k, col) = weight * out[0];
          r.G(index(mode_slot(Dir::B, alpha)) * ks + k, col) = weight * out[1];
        }
      }
    }
  });
  return r;
}

/// Richardson extrapolation of the midpoint march over step and step/2.
inline OracleResult reference_G_extrapolated(const StructureSpec& s, const PumpField& pump, const SpectralBasis& bs,
                                             const SpectralBasis& bi, double step, int workers = 1) {
  OracleResult coarse = reference_G(s, pump, bs, bi, step, workers);
  OracleResult fine = reference_G(s, pump, bs, bi, 0.5 * step, workers);
  fine.G = (4.0 * fine.G - coarse.G) / 3.0;
  return fine;
}

/// Total two-photon amplitude of one channel from the oracle (units s).
inline Eigen::MatrixXcd oracle_amplitude(const OracleResult& r, const Channel& ch, const SpectralBasis& bs,
                                         const SpectralBasis& bi) {
  const int ks = bs.size(), ki = bi.size();
  const int ra = index(mode_slot(ch.a, ch.alpha)), rb = index(mode_slot(ch.b, ch.beta));
  Eigen::MatrixXcd phi = r.G.middleRows(ra * ks, ks) * r.F_i.middleRows(rb * ki, ki).transpose();
  for (int k = 0; k < ks; ++k)
    for (int n = 0; n < ki; ++n) phi(k, n) /= std::sqrt(bs.width(k) * bi.width(n));
  return phi;
}

/// Richardson-extrapolated oracle amplitude for one channel.
inline Eigen::MatrixXcd reference_pair_amplitude(const StructureSpec& s, const PumpField& pump,
                                                 const SpectralBasis& bs, const SpectralBasis& bi, double step,
                                                 const Channel& ch, int workers = 1) {
  return oracle_amplitude(reference_G_extrapolated(s, pump, bs, bi, step, workers), ch, bs, bi);
}

}  // namespace spdc
