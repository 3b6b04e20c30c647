#pragma once

// Single-structure run: pump propagation, emission operators, per-channel observables, output files.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "matrix_core.hpp"
#include "observables.hpp"

namespace spdc {

inline constexpr const char* kVersion = "1.0.0";

struct TemporalSummary {
  bool ok = false;
  std::string status;
  double flux_peak_time = 0.0;   // s
  double flux_fwhm = 0.0;        // s
  double conditional_fwhm = 0.0; // s, along t_s at the t_i of the joint maximum
  std::vector<double> t;
  std::vector<double> flux;
};

struct ChannelResult {
  Channel channel;
  JointDensity density;
  Marginals marginals;
  JointSpectralAmplitude amplitude;
  std::array<TemporalSummary, 3> temporal;  // V, S, SV
};

struct SimulationResult {
  SpectralBasis basis;
  EmissionOperators ops;
  std::vector<ChannelResult> channels;
  double pump_transmission = 0.0;
  bool emission = false;
};

inline TemporalSummary summarize_temporal(const Eigen::MatrixXcd& phi, const SpectralBasis& b, int samples) {
  TemporalSummary s;
  if (phi.isZero(0.0)) {
    s.status = "no emission";
    return s;
  }
  try {
    TimeGrid g;
    g.samples = samples;
    const TemporalProfile tp = temporal_profiles(phi, b, b, g);
    s.t = tp.ts;
    s.flux = tp.ps;
    const WidthResult w = width_fwhm(tp.ts, tp.ps);
    s.flux_peak_time = w.peak;
    s.flux_fwhm = w.width;
    Eigen::Index r = 0, c = 0;
    tp.p.maxCoeff(&r, &c);
    std::vector<double> cut(tp.ts.size());
    for (std::size_t j = 0; j < cut.size(); ++j) cut[j] = tp.p(static_cast<Eigen::Index>(j), c);
    s.conditional_fwhm = width_fwhm(tp.ts, cut).width;
    s.ok = true;
    s.status = "ok";
  } catch (const Error& e) {
    s.status = e.what();
  }
  return s;
}

inline SimulationResult simulate(const StructureSpec& s, const PumpSpec& pump, const BasisSpec& bspec,
                                 const std::vector<Channel>& channels, const TemporalSpec& temporal, int workers = 1) {
  SimulationResult r{SpectralBasis::relative(pump.omega0, bspec.window_lo, bspec.window_hi, bspec.bins), {}, {}, 0.0,
                     false};
  const PumpField field = propagate_pump(s, pump, pump_grid(r.basis, r.basis));
  ModelOptions opt;
  opt.workers = workers;
  r.ops = EmissionModel(s, field, r.basis, r.basis, opt).G();
  r.pump_transmission = linear_transmission(s, pump.omega0, pump.side).T;
  r.emission = r.ops.G_V.norm() > 0.0 || r.ops.G_S.norm() > 0.0;
  for (const Channel& ch : channels) {
    ChannelResult c;
    c.channel = ch;
    const BranchFactors v = branch_amplitudes(r.ops.G_V, r.ops.F_linear, ch, r.basis, r.basis);
    const BranchFactors su = branch_amplitudes(r.ops.G_S, r.ops.F_linear, ch, r.basis, r.basis);
    c.density = joint_density(v, su, ch);
    c.marginals = marginals_and_counts(c.density, r.basis, r.basis);
    c.amplitude = two_photon_amplitude(v, su, ch);
    if (temporal.enabled) {
      c.temporal[0] = summarize_temporal(c.amplitude.V, r.basis, temporal.samples);
      c.temporal[1] = summarize_temporal(c.amplitude.S, r.basis, temporal.samples);
      c.temporal[2] = summarize_temporal(c.amplitude.total, r.basis, temporal.samples);
    }
    r.channels.push_back(std::move(c));
  }
  return r;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os << std::setprecision(17);
  return os;
}

inline json number_or_null(double v, bool defined) { return defined ? json(v) : json(nullptr); }

}  // namespace detail

/// Writes the summary JSON and CSV arrays. File contents depend only on the inputs.
inline json write_outputs(const SimulationResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SpectralBasis& b = r.basis;
  json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = config_hash(cfg.source);
  summary["status"] = r.emission ? "ok" : "no emission";
  summary["pump_transmission"] = r.pump_transmission;
  summary["bins"] = b.size();
  summary["window_rad_per_s"] = {b.omega_min(), b.omega_max()};
  summary["counts_unit"] = "pairs per pulse per transverse mode area A";
  summary["density_unit"] = "s^2 per rad^2/s^2";
  summary["warnings"] = r.ops.warnings;
  summary["channels"] = json::array();
  for (const ChannelResult& c : r.channels) {
    const std::string tag = c.channel.name();
    const Marginals& m = c.marginals;
    json cj;
    cj["channel"] = tag;
    cj["N_V"] = m.N_V;
    cj["N_S"] = m.N_S;
    cj["N_I"] = m.N_I;
    cj["N_SV"] = m.N_SV;
    cj["R"] = detail::number_or_null(m.R, m.R_defined);
    const int mid_k = b.size() / 2, mid_n = b.size() - 1 - mid_k;
    cj["center_density"] = {{"V", c.density.V(mid_k, mid_n)},
                            {"S", c.density.S(mid_k, mid_n)},
                            {"SV", c.density.SV(mid_k, mid_n)}};
    static const char* names[] = {"V", "S", "SV"};
    for (int w = 0; w < 3; ++w) {
      const TemporalSummary& t = c.temporal[w];
      cj["temporal"][names[w]] = {{"status", t.status.empty() ? "disabled" : t.status},
                                  {"flux_peak_time_s", detail::number_or_null(t.flux_peak_time, t.ok)},
                                  {"flux_fwhm_s", detail::number_or_null(t.flux_fwhm, t.ok)},
                                  {"conditional_fwhm_s", detail::number_or_null(t.conditional_fwhm, t.ok)}};
    }
    summary["channels"].push_back(cj);

    auto jd = detail::open_out(dir / ("joint_density_" + tag + ".csv"));
    jd << "omega_s_rad_per_s,omega_i_rad_per_s,n_V_s2,n_S_s2,n_I_s2,n_SV_s2\n";
    if (r.emission)
      for (int k = 0; k < b.size(); ++k)
        for (int n = 0; n < b.size(); ++n)
          jd << b.center(k) << ',' << b.center(n) << ',' << c.density.V(k, n) << ',' << c.density.S(k, n) << ','
             << c.density.I(k, n) << ',' << c.density.SV(k, n) << '\n';

    auto mg = detail::open_out(dir / ("marginals_" + tag + ".csv"));
    mg << "omega_s_rad_per_s,n_s_V_s,n_s_S_s,n_s_I_s,n_s_SV_s,eta_s,eta_defined\n";
    if (r.emission)
      for (int k = 0; k < b.size(); ++k)
        mg << b.center(k) << ',' << m.ns_V(k) << ',' << m.ns_S(k) << ',' << m.ns_I(k) << ',' << m.ns_SV(k) << ','
           << m.eta(k) << ',' << (m.eta_defined[k] ? 1 : 0) << '\n';

    if (!c.temporal[2].t.empty()) {
      auto tf = detail::open_out(dir / ("temporal_flux_" + tag + ".csv"));
      tf << "t_s_s,p_s_V_per_s,p_s_S_per_s,p_s_SV_per_s\n";
      const auto& ts = c.temporal[2].t;
      for (std::size_t j = 0; j < ts.size(); ++j) {
        tf << ts[j];
        for (int w = 0; w < 3; ++w)
          tf << ',' << (j < c.temporal[w].flux.size() ? c.temporal[w].flux[j] : 0.0);
        tf << '\n';
      }
    }
  }
  auto js = detail::open_out(dir / "summary.json");
  js << summary.dump(2) << '\n';
  return summary;
}

}  // namespace spdc
