#pragma once

// Self-check suite on a small structure: oracle agreement, split-layer invariance, unitarity, Parseval.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "oracle.hpp"
#include "simulation.hpp"

namespace spdc {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool gating = true;  // informational checks never fail the run
  bool pass = true;
  std::string detail;
  std::string status() const { return gating ? (pass ? "pass" : "fail") : "info"; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (c.gating && !c.pass) return false;
    return true;
  }
  json to_json() const {
    json j;
    j["version"] = kVersion;
    j["ok"] = ok();
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"value", c.value},
                             {"tolerance", c.tolerance},
                             {"status", c.status()},
                             {"detail", c.detail}});
    return j;
  }
};

struct VerifyOptions {
  double source_scale = 1.0;  // corrupts the pipeline sources only; the oracle must notice
  bool refinement = true;     // basis refinement study (K/2, K, 2K)
};

namespace detail {

inline CheckResult check(std::string name, double value, double tol, bool gating = true, std::string detail = "") {
  CheckResult c{std::move(name), value, tol, gating, std::isfinite(value) && value <= tol, std::move(detail)};
  return c;
}

inline double min_layer_length(const StructureSpec& s) {
  double m = s.length(1);
  for (int l = 2; l <= s.layer_count(); ++l) m = std::min(m, s.length(l));
  return m;
}

inline Eigen::MatrixXcd pipeline_amplitude(const EmissionOperators& ops, const Channel& ch, const SpectralBasis& b) {
  const BranchFactors v = branch_amplitudes(ops.G_V, ops.F_linear, ch, b, b);
  const BranchFactors s = branch_amplitudes(ops.G_S, ops.F_linear, ch, b, b);
  return two_photon_amplitude(v, s, ch).total;
}

}  // namespace detail

inline VerifyReport verify(const RunConfig& cfg, const VerifyOptions& vo = {}) {
  if (!cfg.structure) throw ConfigError("verify needs a structure");
  const StructureSpec& s = *cfg.structure;
  const Channel ch = cfg.channels.front();
  const SpectralBasis b =
      SpectralBasis::relative(cfg.pump.omega0, cfg.basis.window_lo, cfg.basis.window_hi, cfg.verify.bins);
  const PumpField pump = propagate_pump(s, cfg.pump, pump_grid(b, b));
  ModelOptions opt;
  opt.workers = cfg.workers;
  opt.source_scale = vo.source_scale;
  const EmissionOperators ops = EmissionModel(s, pump, b, b, opt).G();
  const Eigen::MatrixXcd amp = detail::pipeline_amplitude(ops, ch, b);
  VerifyReport rep;

  // Oracle agreement on the total amplitude, with the observed step-refinement order.
  {
    const double h = detail::min_layer_length(s) / cfg.verify.step_divisor;
    const OracleResult coarse = reference_G(s, pump, b, b, h, cfg.workers);
    const OracleResult fine = reference_G(s, pump, b, b, 0.5 * h, cfg.workers);
    OracleResult extra = fine;
    extra.G = (4.0 * fine.G - coarse.G) / 3.0;
    const Eigen::MatrixXcd a_coarse = oracle_amplitude(coarse, ch, b, b), a_fine = oracle_amplitude(fine, ch, b, b);
    const Eigen::MatrixXcd a_extra = oracle_amplitude(extra, ch, b, b);
    const double err = relative_difference(amp, a_extra);
    std::ostringstream os;
    os << "channel " << ch.name() << ", K=" << b.size() << ", step " << h << " m";
    rep.checks.push_back(detail::check("oracle_total_amplitude", err, cfg.verify.tolerance, true, os.str()));
    const double e1 = relative_difference(a_coarse, a_extra), e2 = relative_difference(a_fine, a_extra);
    const double ratio = e2 > 0.0 ? e1 / e2 : 0.0;
    CheckResult order{"oracle_step_order_ratio", ratio, 4.0, true, ratio >= 3.0 && ratio <= 5.0,
                      "error ratio for step halving; 4 expected for a second-order march"};
    rep.checks.push_back(order);
    rep.checks.push_back(
        detail::check("oracle_idler_scattering", relative_difference(ops.F_linear.field_block(Field::Idler, Field::Idler)
                                                                         .conjugate(),
                                                                     fine.F_i),
                      1e-12));
  }

  // Split-layer invariance: physical operators gating, the volume/surface split informational.
  {
    double worst_f = 0.0, worst_g = 0.0, worst_v = 0.0, worst_s = 0.0;
    for (int l = 1; l <= s.layer_count(); ++l) {
      const StructureSpec split = s.split(l, 0.37);
      const PumpField p2 = propagate_pump(split, cfg.pump, pump_grid(b, b));
      const EmissionOperators o2 = EmissionModel(split, p2, b, b, opt).G();
      worst_f = std::max(worst_f, relative_difference(ops.F_linear.data(), o2.F_linear.data()));
      worst_g = std::max(worst_g, relative_difference((ops.G_V + ops.G_S).data(), (o2.G_V + o2.G_S).data()));
      worst_v = std::max(worst_v, relative_difference(ops.G_V.data(), o2.G_V.data()));
      worst_s = std::max(worst_s, relative_difference(ops.G_S.data(), o2.G_S.data()));
    }
    rep.checks.push_back(detail::check("split_F_linear", worst_f, 1e-9));
    rep.checks.push_back(detail::check("split_G_total", worst_g, 1e-9));
    rep.checks.push_back(detail::check("split_G_V", worst_v, 1e-9, false, "volume/surface split is basis-dependent"));
    rep.checks.push_back(detail::check("split_G_S", worst_s, 1e-9, false, "volume/surface split is basis-dependent"));
  }

  // Unitarity of the linear scattering and energy balance of the stack.
  {
    const Eigen::MatrixXcd fs = ops.F_linear.field_block(Field::Signal, Field::Signal);
    const double u = (fs.adjoint() * fs - Eigen::MatrixXcd::Identity(fs.rows(), fs.cols())).cwiseAbs().maxCoeff();
    rep.checks.push_back(detail::check("F_signal_unitary", u, 1e-9));
    double tr = 0.0;
    for (int k = 0; k < b.size(); ++k)
      for (Dir d : kDirs) {
        const LinearResponse lr = linear_transmission(s, b.center(k), d);
        tr = std::max(tr, std::abs(lr.T + lr.R - 1.0));
      }
    rep.checks.push_back(detail::check("T_plus_R", tr, 1e-10));
  }

  // Decomposition identity and temporal consistency.
  {
    const BranchFactors v = branch_amplitudes(ops.G_V, ops.F_linear, ch, b, b);
    const BranchFactors su = branch_amplitudes(ops.G_S, ops.F_linear, ch, b, b);
    const JointDensity jd = joint_density(v, su, ch);
    const double scale = jd.SV.abs().maxCoeff();
    const double id = scale > 0.0 ? (jd.SV - jd.V - jd.S - jd.I).abs().maxCoeff() / scale : 0.0;
    rep.checks.push_back(detail::check("decomposition_identity", id, 1e-12));
    if (!amp.isZero(0.0)) {
      const TemporalProfile tp = temporal_profiles(amp, b, b, TimeGrid{cfg.temporal.samples});
      rep.checks.push_back(detail::check("parseval", parseval_residual(amp, b, b, tp), 1e-8));
      rep.checks.push_back(detail::check("temporal_normalisation", std::abs(tp.p.sum() * tp.dt_s * tp.dt_i - 1.0), 1e-6));
    }
  }

  // Basis refinement: N_SV at K/2, K, 2K. Informational.
  if (vo.refinement && b.size() >= 4) {
    std::array<double, 3> n{};
    for (int q = 0; q < 3; ++q) {
      const int k = b.size() * (1 << q) / 2;
      const SpectralBasis bq = SpectralBasis::relative(cfg.pump.omega0, cfg.basis.window_lo, cfg.basis.window_hi, k);
      const EmissionOperators oq = EmissionModel(s, propagate_pump(s, cfg.pump, pump_grid(bq, bq)), bq, bq, opt).G();
      const BranchFactors v = branch_amplitudes(oq.G_V, oq.F_linear, ch, bq, bq);
      const BranchFactors su = branch_amplitudes(oq.G_S, oq.F_linear, ch, bq, bq);
      n[q] = marginals_and_counts(joint_density(v, su, ch), bq, bq).N_SV;
    }
    const double d2 = std::abs(n[1] - n[2]);
    const double ratio = d2 > 0.0 ? std::abs(n[0] - n[1]) / d2 : 0.0;
    std::ostringstream os;
    os << "N_SV at K=" << b.size() / 2 << "," << b.size() << "," << 2 * b.size() << ": " << n[0] << ", " << n[1]
       << ", " << n[2];
    rep.checks.push_back(detail::check("basis_refinement_ratio", ratio, 0.0, false, os.str()));
  }
  return rep;
}

}  // namespace spdc
