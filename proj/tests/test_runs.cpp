#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "spdc/scan.hpp"
#include "spdc/simulation.hpp"
#include "spdc/verify.hpp"

using namespace spdc;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SPDC_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "spdc_test_runs" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

RunConfig small_config(const StructureSpec& s, int bins) {
  RunConfig cfg = load_config(kConfigs / "verify_small.json");
  cfg.structure = s;
  cfg.basis.bins = bins;
  cfg.temporal.samples = 256;
  return cfg;
}

SimulationResult run(const RunConfig& cfg, int workers = 1) {
  return simulate(*cfg.structure, cfg.pump, cfg.basis, cfg.channels, cfg.temporal, workers);
}

}  // namespace

TEST_CASE("linear structure: no emission, header-only tables") {
  const StructureSpec s(fixtures::air(), {{fixtures::gan(0.0), 60e-9, 1}, {fixtures::aln(), 13e-9, 1}},
                        fixtures::air());
  const RunConfig cfg = small_config(s, 8);
  const SimulationResult r = run(cfg);
  CHECK_FALSE(r.emission);
  const fs::path dir = scratch("linear");
  const json summary = write_outputs(r, cfg, dir);
  CHECK(summary["status"] == "no emission");
  CHECK(summary["channels"][0]["R"].is_null());
  CHECK(summary["channels"][0]["N_SV"] == 0.0);
  CHECK(summary["channels"][0]["temporal"]["SV"]["status"] == "no emission");
  CHECK(lines(dir / "joint_density_FF_xy.csv").size() == 1);
  CHECK(lines(dir / "marginals_FF_xy.csv").size() == 1);
  CHECK_FALSE(fs::exists(dir / "temporal_flux_FF_xy.csv"));
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("simulation outputs are reproducible byte for byte") {
  const RunConfig cfg = small_config(fixtures::gan_aln(2), 12);
  const fs::path a = scratch("repeat_a"), b = scratch("repeat_b"), c = scratch("repeat_c");
  write_outputs(run(cfg), cfg, a);
  write_outputs(run(cfg), cfg, b);
  write_outputs(run(cfg, 3), cfg, c);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path name = e.path().filename();
    CHECK(slurp(e.path()) == slurp(b / name));
    CHECK(slurp(e.path()) == slurp(c / name));
    ++files;
  }
  CHECK(files == 4);
  const auto rows = lines(a / "joint_density_FF_xy.csv");
  CHECK(rows.size() == 1 + 12 * 12);
  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary["status"] == "ok");
  CHECK(summary["config_hash"] == config_hash(cfg.source));
  CHECK(summary["channels"][0]["N_SV"].get<double>() > 0.0);
}

TEST_CASE("transmission map does not depend on evaluation order") {
  RunConfig cfg = load_config(kConfigs / "scan_gan_aln.json");
  const ScanContext ctx = scan_context(cfg);
  const auto l1 = range_values({10e-9, 100e-9, 9}), l2 = range_values({10e-9, 100e-9, 7});
  const Eigen::MatrixXd t = transmission_map(ctx, l1, l2);
  std::vector<int> order(63);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(42));
  CHECK(transmission_map(ctx, l1, l2, Dir::F, 1, &order) == t);
  CHECK(transmission_map(ctx, l1, l2, Dir::F, 4, &order) == t);
  order.pop_back();
  CHECK_THROWS_AS(transmission_map(ctx, l1, l2, Dir::F, 1, &order), Error);
}

TEST_CASE("a stack of the ambient material transmits fully") {
  ScanContext ctx;
  ctx.ambient = ctx.m1 = ctx.m2 = fixtures::gan(0.0);
  ctx.omega = fixtures::pump().omega0;
  const auto l = range_values({10e-9, 100e-9, 6});
  const Eigen::MatrixXd t = transmission_map(ctx, l, l);
  CHECK((t.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(track_ridges(t, 2).empty());
}

TEST_CASE("ridge tracking on a synthetic map") {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(5, 9);
  for (int i = 0; i < 5; ++i) {
    t(i, 1 + i) = 1.0;   // drifting ridge
    t(i, 7) = 0.5;       // fixed ridge
  }
  t(4, 1 + 4) = 0.0;
  t(4, 1) = 1.0;         // jumps back by four cells: lost
  const auto r = track_ridges(t, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].points.size() == 4);
  CHECK(r[0].lost);
  CHECK(r[1].points.size() == 5);
  CHECK_FALSE(r[1].lost);
  CHECK(r[1].points.back().j == 7);
  CHECK(track_ridges(t, 2, 0.6).size() == 1);
}

TEST_CASE("GaN/AlN map shows band-gap cells and transmission ridges") {
  const RunConfig cfg = load_config(kConfigs / "scan_gan_aln.json");
  const ScanResult r = scan(cfg, false);
  REQUIRE(r.T.rows() == 20);
  REQUIRE(r.T.cols() == 20);
  CHECK(r.T.allFinite());
  CHECK(r.T.maxCoeff() <= 1.0 + 1e-12);
  CHECK(r.T.maxCoeff() > 0.99);
  const auto ridges = track_ridges(r.T, cfg.scan.max_jump, cfg.scan.floor);
  CHECK(std::any_of(ridges.begin(), ridges.end(), [](const Ridge& x) { return x.points.size() >= 3; }));
  INFO("minimum T_p = " << r.T.minCoeff());
  CHECK((r.T.array() < 0.1).count() > 0);

  const fs::path dir = scratch("map");
  write_scan(r, dir, false);
  const auto rows = lines(dir / "transmission_map.csv");
  REQUIRE(rows.size() == 401);
  CHECK(rows[0] == "l1_m,l2_m,T_p,status");
  CHECK(rows[1].find("converged") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "ridges.csv"));
}

TEST_CASE("self-check suite passes on the small stack and notices corrupted sources") {
  const RunConfig cfg = load_config(kConfigs / "verify_small.json");
  const VerifyReport good = verify(cfg);
  for (const CheckResult& c : good.checks) {
    INFO(c.name << " = " << c.value);
    if (c.gating) CHECK(c.pass);
  }
  CHECK(good.ok());
  const json j = good.to_json();
  CHECK(j["ok"] == true);
  CHECK(j["checks"].size() == good.checks.size());

  VerifyOptions bad;
  bad.source_scale = 1.01;
  const VerifyReport rep = verify(cfg, bad);
  CHECK_FALSE(rep.ok());
  const auto oracle = std::find_if(rep.checks.begin(), rep.checks.end(),
                                   [](const CheckResult& c) { return c.name == "oracle_total_amplitude"; });
  REQUIRE(oracle != rep.checks.end());
  CHECK_FALSE(oracle->pass);
  CHECK(oracle->value > 5e-3);
}
