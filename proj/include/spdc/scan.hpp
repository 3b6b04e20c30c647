#pragma once

// (l1, l2) transmission maps of periodic two-material stacks and pair emission along tracked ridges.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "config.hpp"
#include "parallel.hpp"
#include "simulation.hpp"

namespace spdc {

struct RidgePoint {
  int i = 0;  // l1 index
  int j = 0;  // l2 index
  double T = 0.0;
  double N_V = 0.0, N_S = 0.0, N_SV = 0.0, R = 0.0;
};

struct Ridge {
  std::vector<RidgePoint> points;
  bool lost = false;
};

struct ScanResult {
  std::vector<double> l1, l2;
  Eigen::MatrixXd T;  // rows l1, columns l2
  std::vector<Ridge> ridges;
  std::string config_hash;
  std::string version = kVersion;
};

/// Periodic stack (m1 l1, m2 l2) x periods between the given ambient media.
inline StructureSpec periodic_stack(const MaterialModel& ambient, const MaterialModel& m1, const MaterialModel& m2,
                                    double l1, double l2, int periods) {
  std::vector<Layer> layers;
  for (int p = 0; p < periods; ++p) {
    layers.push_back({m1, l1, 1});
    layers.push_back({m2, l2, 1});
  }
  return StructureSpec(ambient, std::move(layers), ambient);
}

struct ScanContext {
  MaterialModel ambient, m1, m2;
  int periods = 10;
  double omega = 0.0;
};

inline ScanContext scan_context(const RunConfig& cfg) {
  ScanContext c;
  if (!cfg.scan.ambient.empty()) c.ambient = cfg.material(cfg.scan.ambient);
  else if (cfg.structure) c.ambient = cfg.structure->medium(0);
  else c.ambient = MaterialModel::constant("vacuum", 1.0);
  c.m1 = cfg.material(cfg.scan.material_1);
  c.m2 = cfg.material(cfg.scan.material_2);
  c.periods = cfg.scan.periods;
  c.omega = cfg.pump.omega0;
  return c;
}

/// Linear intensity transmission at the central pump frequency over the grid. Cells are independent;
/// `order` (a permutation of cell indices) only changes the evaluation sequence.
inline Eigen::MatrixXd transmission_map(const ScanContext& ctx, const std::vector<double>& l1,
                                        const std::vector<double>& l2, Dir side = Dir::F, int workers = 1,
                                        const std::vector<int>* order = nullptr) {
  const int n1 = static_cast<int>(l1.size()), n2 = static_cast<int>(l2.size());
  Eigen::MatrixXd t(n1, n2);
  std::vector<int> seq(n1 * n2);
  std::iota(seq.begin(), seq.end(), 0);
  if (order) {
    if (order->size() != seq.size()) throw Error("transmission_map: order has wrong size");
    seq = *order;
  }
  parallel_for(n1 * n2, workers, [&](int q) {
    const int cell = seq[q], i = cell / n2, j = cell % n2;
    t(i, j) = linear_transmission(periodic_stack(ctx.ambient, ctx.m1, ctx.m2, l1[i], l2[j], ctx.periods), ctx.omega,
                                  side)
                  .T;
  });
  return t;
}

/// Rises smaller than this are treated as flat (no maximum).
inline constexpr double kRidgeEps = 1e-9;

/// Nearest-maximum continuation of T maxima along l2, row by row in l1.
inline std::vector<Ridge> track_ridges(const Eigen::MatrixXd& t, int max_jump, double floor = 0.0) {
  auto maxima = [&](int i) {
    std::vector<int> out;
    const int n2 = static_cast<int>(t.cols());
    for (int j = 1; j + 1 < n2; ++j)
      if (t(i, j) - t(i, j - 1) > kRidgeEps && t(i, j) - t(i, j + 1) >= -kRidgeEps && t(i, j) >= floor)
        out.push_back(j);
    return out;
  };
  std::vector<Ridge> ridges;
  if (t.rows() == 0) return ridges;
  for (int j : maxima(0)) ridges.push_back({{RidgePoint{0, j, t(0, j)}}, false});
  for (int i = 1; i < t.rows(); ++i) {
    const std::vector<int> cand = maxima(i);
    std::vector<bool> taken(cand.size(), false);
    for (Ridge& r : ridges) {
      if (r.lost) continue;
      const int prev = r.points.back().j;
      int best = -1;
      for (std::size_t c = 0; c < cand.size(); ++c) {
        if (taken[c] || std::abs(cand[c] - prev) > max_jump) continue;
        if (best < 0 || std::abs(cand[c] - prev) < std::abs(cand[best] - prev)) best = static_cast<int>(c);
      }
      if (best < 0) {
        r.lost = true;
        continue;
      }
      taken[best] = true;
      r.points.push_back({i, cand[best], t(i, cand[best])});
    }
  }
  return ridges;
}

/// Pair numbers along every ridge point (first configured channel).
inline void evaluate_ridges(std::vector<Ridge>& ridges, const ScanContext& ctx, const std::vector<double>& l1,
                            const std::vector<double>& l2, const PumpSpec& pump, const BasisSpec& basis,
                            const Channel& ch, int workers = 1) {
  std::vector<RidgePoint*> pts;
  for (Ridge& r : ridges)
    for (RidgePoint& p : r.points) pts.push_back(&p);
  TemporalSpec no_time;
  no_time.enabled = false;
  parallel_for(static_cast<int>(pts.size()), workers, [&](int q) {
    RidgePoint& p = *pts[q];
    const auto res = simulate(periodic_stack(ctx.ambient, ctx.m1, ctx.m2, l1[p.i], l2[p.j], ctx.periods), pump, basis,
                              {ch}, no_time, 1);
    const Marginals& m = res.channels[0].marginals;
    p.N_V = m.N_V;
    p.N_S = m.N_S;
    p.N_SV = m.N_SV;
    p.R = m.R_defined ? m.R : 0.0;
  });
}

inline std::vector<double> range_values(const Range& r) {
  std::vector<double> v(r.count);
  for (int i = 0; i < r.count; ++i) v[i] = r.at(i);
  return v;
}

inline ScanResult scan(const RunConfig& cfg, bool with_ridges = true) {
  ScanResult out;
  const ScanContext ctx = scan_context(cfg);
  out.l1 = range_values(cfg.scan.l1);
  out.l2 = range_values(cfg.scan.l2);
  out.config_hash = config_hash(cfg.source);
  out.T = transmission_map(ctx, out.l1, out.l2, cfg.pump.side, cfg.workers);
  if (with_ridges) {
    out.ridges = track_ridges(out.T, cfg.scan.max_jump, cfg.scan.floor);
    BasisSpec b = cfg.basis;
    b.bins = cfg.scan.bins;
    evaluate_ridges(out.ridges, ctx, out.l1, out.l2, cfg.pump, b, cfg.channels.front(), cfg.workers);
  }
  return out;
}

inline void write_scan(const ScanResult& r, const std::filesystem::path& dir, bool with_ridges = true) {
  std::filesystem::create_directories(dir);
  auto tm = detail::open_out(dir / "transmission_map.csv");
  tm << "l1_m,l2_m,T_p,status\n";
  for (std::size_t i = 0; i < r.l1.size(); ++i)
    for (std::size_t j = 0; j < r.l2.size(); ++j) {
      const double t = r.T(i, j);
      tm << r.l1[i] << ',' << r.l2[j] << ',' << t << ',' << (std::isfinite(t) ? "converged" : "flagged") << '\n';
    }
  if (!with_ridges) return;
  auto rc = detail::open_out(dir / "ridges.csv");
  rc << "ridge,l1_m,l2_m,T_p,N_V,N_S,N_SV,R,status\n";
  json summary;
  summary["version"] = r.version;
  summary["config_hash"] = r.config_hash;
  summary["ridges"] = json::array();
  for (std::size_t q = 0; q < r.ridges.size(); ++q) {
    const Ridge& rd = r.ridges[q];
    for (std::size_t k = 0; k < rd.points.size(); ++k) {
      const RidgePoint& p = rd.points[k];
      const bool last = k + 1 == rd.points.size();
      rc << q << ',' << r.l1[p.i] << ',' << r.l2[p.j] << ',' << p.T << ',' << p.N_V << ',' << p.N_S << ','
         << p.N_SV << ',' << p.R << ',' << (last && rd.lost ? "RidgeLost" : "converged") << '\n';
    }
    summary["ridges"].push_back({{"index", q}, {"points", rd.points.size()}, {"lost", rd.lost}});
  }
  auto js = detail::open_out(dir / "scan_summary.json");
  js << summary.dump(2) << '\n';
}

}  // namespace spdc
