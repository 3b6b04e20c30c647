// spdc: command-line driver for layered-medium pair-emission runs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spdc/scan.hpp"
#include "spdc/simulation.hpp"
#include "spdc/verify.hpp"

namespace fs = std::filesystem;
using namespace spdc;

namespace {

struct Common {
  std::string config;
  std::optional<int> bins;
  std::optional<double> window_lo, window_hi;
  std::optional<int> workers;
  std::string out_dir;
  std::string structure;
  std::vector<double> l1_range, l2_range;
  bool seedless = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--bins", c.bins, "bins per field")->check(CLI::PositiveNumber);
  cmd->add_option("--window-lo", c.window_lo, "lower window edge / omega_p0");
  cmd->add_option("--window-hi", c.window_hi, "upper window edge / omega_p0");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "output directory (overrides output_dir)");
  cmd->add_option("--structure", c.structure, "structure JSON replacing the configured one")
      ->check(CLI::ExistingFile);
  cmd->add_option("--l1-range", c.l1_range, "lo hi count (metres)")->expected(3);
  cmd->add_option("--l2-range", c.l2_range, "lo hi count (metres)")->expected(3);
  cmd->add_flag("--seedless", c.seedless, "assert a run without random numbers (always true)");
}

Range to_range(const std::vector<double>& v, const char* what) {
  Range r{v[0], v[1], static_cast<int>(v[2])};
  if (r.count < 1 || !(r.lo > 0.0) || r.hi < r.lo || v[2] != static_cast<double>(r.count))
    throw ConfigError(std::string(what) + ": need 0 < lo <= hi and an integer count >= 1");
  return r;
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (!c.structure.empty()) {
    const json s = detail::read_json_file(c.structure);
    cfg.structure = parse_structure(s, cfg, c.structure);
    cfg.source["structure_override"] = s;
  }
  if (c.bins) cfg.basis.bins = cfg.scan.bins = cfg.verify.bins = *c.bins;
  if (c.window_lo) cfg.basis.window_lo = *c.window_lo;
  if (c.window_hi) cfg.basis.window_hi = *c.window_hi;
  if (!(cfg.basis.window_lo > 0.0) || !(cfg.basis.window_hi > cfg.basis.window_lo))
    throw ConfigError("window: need 0 < window-lo < window-hi");
  if (c.workers) cfg.workers = *c.workers;
  if (!c.l1_range.empty()) cfg.scan.l1 = to_range(c.l1_range, "--l1-range");
  if (!c.l2_range.empty()) cfg.scan.l2 = to_range(c.l2_range, "--l2-range");
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  // Overrides are part of the run identity.
  cfg.source["cli_overrides"] = {{"bins", cfg.basis.bins},
                                 {"window", {cfg.basis.window_lo, cfg.basis.window_hi}},
                                 {"l1", {cfg.scan.l1.lo, cfg.scan.l1.hi, cfg.scan.l1.count}},
                                 {"l2", {cfg.scan.l2.lo, cfg.scan.l2.hi, cfg.scan.l2.count}}};
  return cfg;
}

const StructureSpec& need_structure(const RunConfig& cfg) {
  if (!cfg.structure) throw ConfigError("structure: missing (give \"structure\", \"structure_file\" or --structure)");
  return *cfg.structure;
}

int run_simulate(const Common& c) {
  const RunConfig cfg = load(c);
  const SimulationResult r =
      simulate(need_structure(cfg), cfg.pump, cfg.basis, cfg.channels, cfg.temporal, cfg.workers);
  const json summary = write_outputs(r, cfg, cfg.output_dir);
  for (const auto& w : r.ops.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "status " << summary["status"].get<std::string>() << ", T_p " << r.pump_transmission << '\n';
  for (const ChannelResult& ch : r.channels) {
    std::cout << ch.channel.name() << ": N_V " << ch.marginals.N_V << "  N_S " << ch.marginals.N_S << "  N_SV "
              << ch.marginals.N_SV;
    if (ch.marginals.R_defined) std::cout << "  R " << ch.marginals.R;
    std::cout << '\n';
  }
  std::cout << "wrote " << cfg.output_dir << '\n';
  return 0;
}

int run_scan(const Common& c, bool ridges) {
  const RunConfig cfg = load(c);
  const ScanResult r = scan(cfg, ridges);
  write_scan(r, cfg.output_dir, ridges);
  std::cout << "map " << r.l1.size() << "x" << r.l2.size() << ", T_p in [" << r.T.minCoeff() << ", "
            << r.T.maxCoeff() << "]\n";
  if (ridges) {
    for (std::size_t q = 0; q < r.ridges.size(); ++q)
      std::cout << "ridge " << q << ": " << r.ridges[q].points.size() << " points"
                << (r.ridges[q].lost ? " (RidgeLost)" : "") << '\n';
  }
  std::cout << "wrote " << cfg.output_dir << '\n';
  return 0;
}

int run_verify(const Common& c, double mutate) {
  const RunConfig cfg = load(c);
  VerifyOptions vo;
  vo.source_scale = mutate;
  const VerifyReport rep = verify(cfg, vo);
  for (const CheckResult& k : rep.checks) {
    std::cout << (k.status() == "pass" ? "PASS " : k.status() == "fail" ? "FAIL " : "INFO ") << k.name << "  "
              << k.value;
    if (k.gating) std::cout << " (tol " << k.tolerance << ")";
    if (!k.detail.empty()) std::cout << "  " << k.detail;
    std::cout << '\n';
  }
  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "verify_report.json") << rep.to_json().dump(2) << '\n';
  std::cout << (rep.ok() ? "all checks passed" : "verification FAILED") << '\n';
  return rep.ok() ? 0 : 1;
}

int run_dump(const Common& c, const std::string& name, int boundary, const std::string& file) {
  const RunConfig cfg = load(c);
  const StructureSpec& s = need_structure(cfg);
  const SpectralBasis b =
      SpectralBasis::relative(cfg.pump.omega0, cfg.basis.window_lo, cfg.basis.window_hi, cfg.basis.bins);
  ModelOptions opt;
  opt.workers = cfg.workers;
  const EmissionModel m(s, propagate_pump(s, cfg.pump, pump_grid(b, b)), b, b, opt);
  const int l = boundary;
  BlockMatrix out;
  if (name == "L") out = m.L(l);
  else if (name == "P") out = m.P(l);
  else if (name == "T") out = m.T(l);
  else if (name == "T_tilde") out = m.T_tilde(l);
  else if (name == "F") out = m.F();
  else if (name == "W") out = m.W();
  else if (name == "Z") out = m.Z();
  else if (name == "U") out = m.U();
  else if (name == "V") out = m.V();
  else if (name == "X") out = m.X(l);
  else if (name == "Y") out = m.Y();
  else if (name == "M") out = m.jump_operator(l);
  else if (name == "S_V") out = m.S(l, Contribution::V);
  else if (name == "S_S") out = m.S(l, Contribution::S);
  else if (name == "G_V" || name == "G_S") {
    const EmissionOperators ops = m.G();
    out = name == "G_V" ? ops.G_V : ops.G_S;
  } else
    throw ConfigError("unknown matrix '" + name + "'");
  const fs::path path = file.empty() ? fs::path(cfg.output_dir) / ("matrix_" + name + ".csv") : fs::path(file);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  out.write_csv(os);
  std::cout << "wrote " << path.string() << " (" << out.rows().size() << "x" << out.cols().size() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair emission in 1D layered nonlinear media"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common sim, sc, tm, ver, dump;
  auto* c_sim = app.add_subcommand("simulate", "single structure: densities, counts, temporal profiles");
  add_common(c_sim, sim);
  auto* c_scan = app.add_subcommand("scan", "(l1, l2) transmission map with ridge tracking and pair counts");
  add_common(c_scan, sc);
  auto* c_map = app.add_subcommand("transmission-map", "(l1, l2) linear pump transmission only");
  add_common(c_map, tm);
  auto* c_ver = app.add_subcommand("verify", "oracle, split-layer, unitarity and Parseval checks");
  add_common(c_ver, ver);
  double mutate = 1.0;
  c_ver->add_option("--mutate-source", mutate, "scale the pipeline sources (self-test of the oracle check)");
  auto* c_dump = app.add_subcommand("dump-matrix", "write one named matrix as CSV");
  add_common(c_dump, dump);
  std::string matrix, file;
  int boundary = 1;
  c_dump->add_option("--matrix", matrix, "L P T T_tilde F W Z U V X Y M S_V S_S G_V G_S")->required();
  c_dump->add_option("--index", boundary, "medium or boundary index where applicable");
  c_dump->add_option("--file", file, "output CSV (default <out-dir>/matrix_<name>.csv)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_scan) return run_scan(sc, true);
    if (*c_map) return run_scan(tm, false);
    if (*c_ver) return run_verify(ver, mutate);
    if (*c_dump) return run_dump(dump, matrix, boundary, file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
