#pragma once

// Joint spectral densities, marginals, pair counts, two-photon amplitudes and temporal profiles.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "block_matrix.hpp"
#include "errors.hpp"
#include "matrix_core.hpp"
#include "spectral.hpp"

namespace spdc {

/// Output channel: signal direction a / polarisation alpha, idler direction b / polarisation beta.
struct Channel {
  Dir a = Dir::F;
  Dir b = Dir::F;
  Pol alpha = Pol::X;
  Pol beta = Pol::Y;

  std::string name() const {
    return std::string{dir_char(a), dir_char(b), '_', pol_char(alpha), pol_char(beta)};
  }
};

/// The two factors of the pair density for one contribution, as spectral densities (units s).
/// idler_branch  = sum_g F_i[b,g] G[s_a, i_g],  signal_branch = sum_d F_s[a,d] G*[i_b, s_d].
struct BranchFactors {
  Eigen::MatrixXcd idler_branch;
  Eigen::MatrixXcd signal_branch;
};

inline BranchFactors branch_amplitudes(const BlockMatrix& g, const BlockMatrix& f, const Channel& ch,
                                       const SpectralBasis& bs, const SpectralBasis& bi) {
  const IndexSpace& sp = g.rows();
  if (!(sp == f.rows()) || !(g.cols() == f.cols()) || sp.bins(Field::Signal) != bs.size() ||
      sp.bins(Field::Idler) != bi.size())
    throw Error("branch_amplitudes: label mismatch");
  const int ks = bs.size(), ki = bi.size();
  const int ra = index(mode_slot(ch.a, ch.alpha)), rb = index(mode_slot(ch.b, ch.beta));
  // The idler^dagger block of F is the conjugate of the physical idler scattering matrix.
  const Eigen::MatrixXcd fi_rows = f.field_block(Field::Idler, Field::Idler).middleRows(rb * ki, ki).conjugate();
  const Eigen::MatrixXcd fs_rows = f.field_block(Field::Signal, Field::Signal).middleRows(ra * ks, ks);
  const Eigen::MatrixXcd gs_rows = g.field_block(Field::Signal, Field::Idler).middleRows(ra * ks, ks);
  const Eigen::MatrixXcd gi_rows = g.field_block(Field::Idler, Field::Signal).middleRows(rb * ki, ki);
  BranchFactors out{gs_rows * fi_rows.transpose(), fs_rows * gi_rows.conjugate().transpose()};
  for (int k = 0; k < ks; ++k)
    for (int n = 0; n < ki; ++n) {
      const double w = 1.0 / std::sqrt(bs.width(k) * bi.width(n));
      out.idler_branch(k, n) *= w;
      out.signal_branch(k, n) *= w;
    }
  return out;
}

struct JointDensity {
  Channel channel;
  Eigen::ArrayXXd V, S, I, SV;  // units s^2, rows signal bins, columns idler bins
};

/// n^{ww'} = Re(idler_branch^w conj(signal_branch^{w'})); the h.c. term symmetrises the product.
inline JointDensity joint_density(const BranchFactors& v, const BranchFactors& s, const Channel& ch = {}) {
  auto cross = [](const BranchFactors& x, const BranchFactors& y) {
    return Eigen::ArrayXXd((x.idler_branch.array() * y.signal_branch.array().conjugate()).real());
  };
  JointDensity jd;
  jd.channel = ch;
  jd.V = cross(v, v);
  jd.S = cross(s, s);
  jd.I = cross(v, s) + cross(s, v);
  BranchFactors total{v.idler_branch + s.idler_branch, v.signal_branch + s.signal_branch};
  jd.SV = cross(total, total);
  const Eigen::ArrayXXd sum = jd.V + jd.S + jd.I;
  const double scale = std::max({jd.V.abs().maxCoeff(), jd.S.abs().maxCoeff(), jd.I.abs().maxCoeff(), 1e-300});
  if ((jd.SV - sum).abs().maxCoeff() > 1e-12 * scale) throw Error("density decomposition identity violated");
  return jd;
}

/// Relative floor below which the surface/volume ratio is not reported.
inline constexpr double kEtaFloor = 1e-12;

struct Marginals {
  Eigen::ArrayXd ns_V, ns_S, ns_I, ns_SV;  // signal densities, s per unit area
  double N_V = 0, N_S = 0, N_I = 0, N_SV = 0;
  Eigen::ArrayXd eta;                      // 0 where not defined
  std::vector<bool> eta_defined;
  double R = 0.0;
  bool R_defined = false;
};

inline Marginals marginals_and_counts(const JointDensity& jd, const SpectralBasis& bs, const SpectralBasis& bi) {
  const int ks = bs.size(), ki = bi.size();
  Eigen::ArrayXd dwi(ki);
  for (int n = 0; n < ki; ++n) dwi(n) = bi.width(n);
  Marginals m;
  auto marg = [&](const Eigen::ArrayXXd& a) { return Eigen::ArrayXd(a.matrix() * dwi.matrix()); };
  m.ns_V = marg(jd.V);
  m.ns_S = marg(jd.S);
  m.ns_I = marg(jd.I);
  m.ns_SV = marg(jd.SV);
  auto total = [&](const Eigen::ArrayXd& a) {
    double t = 0.0;
    for (int k = 0; k < ks; ++k) t += a(k) * bs.width(k);
    return t;
  };
  m.N_V = total(m.ns_V);
  m.N_S = total(m.ns_S);
  m.N_I = total(m.ns_I);
  m.N_SV = total(m.ns_SV);
  m.eta = Eigen::ArrayXd::Zero(ks);
  m.eta_defined.assign(ks, false);
  const double floor = std::max(kEtaFloor * m.ns_V.maxCoeff(), 1e-300);
  for (int k = 0; k < ks; ++k)
    if (m.ns_V(k) > floor) {
      m.eta(k) = m.ns_S(k) / m.ns_V(k);
      m.eta_defined[k] = true;
    }
  if (m.N_V > 0.0) {
    m.R = m.N_S / m.N_V;
    m.R_defined = true;
  }
  return m;
}

struct JointSpectralAmplitude {
  Channel channel;
  Eigen::MatrixXcd V, S, total;  // units s
};

/// Per-contribution amplitude is the mean of the two branch factors; the total is their sum over
/// contributions, for which both branches coincide.
inline JointSpectralAmplitude two_photon_amplitude(const BranchFactors& v, const BranchFactors& s,
                                                   const Channel& ch = {}) {
  JointSpectralAmplitude a;
  a.channel = ch;
  a.V = 0.5 * (v.idler_branch + v.signal_branch);
  a.S = 0.5 * (s.idler_branch + s.signal_branch);
  a.total = a.V + a.S;
  return a;
}

struct WidthResult {
  double width = 0.0;
  double peak = 0.0;       // abscissa of the global maximum
  double peak_value = 0.0;
  std::optional<double> secondary_peak;
  std::optional<double> secondary_width;
};

namespace detail {

inline double crossing(const std::vector<double>& x, const std::vector<double>& y, int i, int j, double level) {
  const double t = (level - y[i]) / (y[j] - y[i]);
  return x[i] + t * (x[j] - x[i]);
}

/// Half-maximum crossings around index p at the given level; throws if the curve never drops below it.
inline std::pair<double, double> half_crossings(const std::vector<double>& x, const std::vector<double>& y, int p,
                                                double level, int& lo, int& hi) {
  lo = p;
  while (lo > 0 && y[lo] > level) --lo;
  hi = p;
  const int last = static_cast<int>(y.size()) - 1;
  while (hi < last && y[hi] > level) ++hi;
  if (y[lo] > level || y[hi] > level) throw NoPeak("curve does not fall to half maximum");
  return {crossing(x, y, lo, lo + 1, level), crossing(x, y, hi - 1, hi, level)};
}

}  // namespace detail

/// Full width at half maximum of the global peak with linear interpolation of the crossings.
/// The largest other local maximum (above 1e-3 of the peak) is reported separately.
inline WidthResult width_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw NoPeak("need at least three samples");
  const auto mx = std::max_element(y.begin(), y.end());
  const auto mn = std::min_element(y.begin(), y.end());
  if (!(*mx > 0.0) || *mx - *mn <= 1e-12 * std::abs(*mx)) throw NoPeak("curve is flat");
  const int p = static_cast<int>(mx - y.begin());
  int lo = 0, hi = 0;
  auto [l, r] = detail::half_crossings(x, y, p, 0.5 * *mx, lo, hi);
  WidthResult out{r - l, x[p], *mx, std::nullopt, std::nullopt};
  int best = -1;
  for (int i = 1; i + 1 < static_cast<int>(y.size()); ++i) {
    if (i >= lo && i <= hi) continue;
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 1e-3 * *mx && (best < 0 || y[i] > y[best])) best = i;
  }
  if (best >= 0) {
    out.secondary_peak = x[best];
    try {
      int a = 0, b = 0;
      auto [sl, sr] = detail::half_crossings(x, y, best, 0.5 * y[best], a, b);
      out.secondary_width = sr - sl;
    } catch (const NoPeak&) {
    }
  }
  return out;
}

struct TimeGrid {
  int samples = 2048;
  double t_min = 0.0;
  double t_max = 0.0;  // both zero: one full period 2 pi / d_omega centred on zero
};

struct TemporalProfile {
  std::vector<double> ts, ti;
  double dt_s = 0.0, dt_i = 0.0;
  Eigen::MatrixXcd amplitude;  // temporal two-photon amplitude
  Eigen::ArrayXXd p;           // normalised joint density
  std::vector<double> ps;      // normalised signal flux
};

namespace detail {

inline std::vector<double> time_axis(const SpectralBasis& b, const TimeGrid& g) {
  const double dw = b.width(0);
  for (int k = 1; k < b.size(); ++k)
    if (std::abs(b.width(k) - dw) > 1e-9 * dw) throw GridTooCoarse("temporal transform needs uniform bins");
  const double period = 2.0 * kPi / dw;
  double t0 = g.t_min, t1 = g.t_max;
  const bool full = t0 == 0.0 && t1 == 0.0;
  if (full) {
    t0 = -0.5 * period;
    t1 = 0.5 * period;
  }
  if (g.samples < 2 || !(t1 > t0)) throw ConfigError("invalid time grid");
  const double dt = (t1 - t0) / (full ? g.samples : g.samples - 1);
  if (t1 - t0 > period * (1.0 + 1e-12)) throw GridTooCoarse("time window exceeds the alias-free period 2pi/d_omega");
  const double bandwidth = b.omega_max() - b.omega_min();
  if (dt > 2.0 * kPi / bandwidth) throw GridTooCoarse("time step too coarse for the spectral window");
  std::vector<double> t(g.samples);
  for (int j = 0; j < g.samples; ++j) t[j] = t0 + j * dt;
  return t;
}

}  // namespace detail

/// phi~(t_s, t_i) = sum_kn phi(w_k, w_n) exp(-i w_k t_s - i w_n t_i) dw_k dw_n, then |.|^2 normalised.
inline TemporalProfile temporal_profiles(const Eigen::MatrixXcd& phi, const SpectralBasis& bs,
                                         const SpectralBasis& bi, const TimeGrid& grid = {}) {
  if (phi.rows() != bs.size() || phi.cols() != bi.size()) throw Error("temporal_profiles: shape mismatch");
  TemporalProfile tp;
  tp.ts = detail::time_axis(bs, grid);
  tp.ti = detail::time_axis(bi, grid);
  tp.dt_s = tp.ts[1] - tp.ts[0];
  tp.dt_i = tp.ti[1] - tp.ti[0];
  auto kernel = [](const SpectralBasis& b, const std::vector<double>& t) {
    Eigen::MatrixXcd e(b.size(), t.size());
    for (int k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < t.size(); ++j) e(k, j) = std::exp(-kI * (b.center(k) * t[j])) * b.width(k);
    return e;
  };
  const Eigen::MatrixXcd es = kernel(bs, tp.ts), ei = kernel(bi, tp.ti);
  tp.amplitude = es.transpose() * phi * ei;
  tp.p = tp.amplitude.array().abs2();
  const double norm = tp.p.sum() * tp.dt_s * tp.dt_i;
  if (!(norm > 0.0)) throw NoPeak("zero two-photon amplitude");
  tp.p /= norm;
  tp.ps.resize(tp.ts.size());
  for (std::size_t j = 0; j < tp.ts.size(); ++j) tp.ps[j] = tp.p.row(j).sum() * tp.dt_i;
  return tp;
}

/// Relative mismatch of sum |phi~|^2 dt_s dt_i against (2 pi)^2 sum |phi|^2 dw_s dw_i.
inline double parseval_residual(const Eigen::MatrixXcd& phi, const SpectralBasis& bs, const SpectralBasis& bi,
                                const TemporalProfile& tp) {
  double spectral = 0.0;
  for (int k = 0; k < bs.size(); ++k)
    for (int n = 0; n < bi.size(); ++n) spectral += std::norm(phi(k, n)) * bs.width(k) * bi.width(n);
  spectral *= 4.0 * kPi * kPi;
  const double temporal = tp.amplitude.cwiseAbs2().sum() * tp.dt_s * tp.dt_i;
  return std::abs(temporal - spectral) / spectral;
}

}  // namespace spdc
