#include <catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "spdc/config.hpp"

using namespace spdc;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(SPDC_SOURCE_DIR) / "configs";

json minimal() {
  return json::parse(R"({
    "materials": [
      {"name": "air", "dispersion": {"type": "constant", "n": 1.0}},
      {"name": "X", "dispersion": {"type": "constant", "n": 2.0}, "chi2": [{"pol": "y;xy", "d_m_per_V": 1e-12}]}
    ],
    "structure": {"ambient_in": "air", "layers": [{"material": "X", "length_m": 50e-9}]},
    "pump": {"wavelength_m": 400e-9, "fwhm_wavelength_m": 7e-9, "energy_per_area_J_per_m2": 1e3}
  })");
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configurations parse") {
  const RunConfig ex = load_config(kConfigs / "gan_aln_10.json");
  REQUIRE(ex.structure);
  CHECK(ex.structure->layer_count() == 20);
  CHECK(ex.structure->medium(1).name() == "GaN");
  CHECK(ex.structure->medium(2).name() == "AlN");
  CHECK_THAT(ex.structure->length(1), WithinRel(60e-9, 1e-15));
  CHECK_THAT(ex.structure->length(20), WithinRel(13e-9, 1e-15));
  CHECK(ex.basis.bins == 64);
  CHECK(ex.channels.size() == 1);
  CHECK(ex.channels[0].name() == "FF_xy");
  CHECK(ex.pump.polarization == Pol::Y);
  CHECK_THAT(ex.pump.omega0, WithinRel(omega_from_wavelength(400e-9), 1e-15));
  CHECK(ex.structure->medium(2).is_linear());
  CHECK(ex.structure->medium(1).chi2_effective(Pol::Y, Pol::X, Pol::Y) == 4e-12);

  const RunConfig sc = load_config(kConfigs / "scan_gan_aln.json");
  CHECK_FALSE(sc.structure);
  CHECK(sc.scan.l1.count == 20);
  CHECK(sc.scan.bins == 24);
  CHECK(sc.scan.ambient == "air");

  const RunConfig v = load_config(kConfigs / "verify_small.json");
  CHECK(v.structure->layer_count() == 4);
  CHECK(v.verify.bins == 16);
}

TEST_CASE("defaults") {
  const RunConfig c = parse_config(minimal());
  CHECK(c.basis.bins == 64);
  CHECK(c.basis.window_lo == 0.05);
  CHECK(c.basis.window_hi == 0.95);
  CHECK(c.pump.side == Dir::F);
  CHECK(c.channels.size() >= 1);
  CHECK(c.structure->medium(2).name() == "air");
}

TEST_CASE("unknown keys are rejected with their path") {
  json j = minimal();
  j["pump"]["polarisation"] = "x";
  CHECK_THAT(error_of(j), ContainsSubstring("pump.polarisation: unknown key"));
  j = minimal();
  j["structure"]["layers"][0]["thickness"] = 1.0;
  CHECK_THAT(error_of(j), ContainsSubstring("structure.layers[0].thickness"));
  j = minimal();
  j["materials"][1]["dispersion"]["b"] = 1.0;
  CHECK_THAT(error_of(j), ContainsSubstring("materials[1].dispersion.b"));
  j = minimal();
  j["bogus"] = 1;
  CHECK_THAT(error_of(j), ContainsSubstring("bogus"));
}

TEST_CASE("invalid values are rejected") {
  json j = minimal();
  j["pump"].erase("wavelength_m");
  CHECK_THAT(error_of(j), ContainsSubstring("pump.wavelength_m"));
  j = minimal();
  j["pump"]["fwhm_wavelength_m"] = -1.0;
  CHECK_THAT(error_of(j), ContainsSubstring("pump.fwhm_wavelength_m"));
  j = minimal();
  j["structure"]["layers"][0]["material"] = "Y";
  CHECK_FALSE(error_of(j).empty());
  j = minimal();
  j["materials"][1]["chi2"][0]["pol"] = "z;xy";
  CHECK_FALSE(error_of(j).empty());
  j = minimal();
  j["basis"] = {{"window_lo", 0.6}, {"window_hi", 0.5}};
  CHECK_FALSE(error_of(j).empty());
  j = minimal();
  j["materials"].push_back(j["materials"][0]);
  CHECK_THAT(error_of(j), ContainsSubstring("duplicate"));
  j = minimal();
  j["structure"]["layers"] = json::array({{{"repeat", 0}, {"layers", json::array()}}});
  CHECK_THAT(error_of(j), ContainsSubstring("repeat"));
  CHECK_THROWS_AS(load_config(kConfigs / "does_not_exist.json"), ConfigError);
}

TEST_CASE("repeat blocks expand in order") {
  json j = minimal();
  j["structure"]["layers"] = json::parse(R"([
    {"material": "air", "length_m": 1e-9},
    {"repeat": 3, "layers": [{"material": "X", "length_m": 2e-9, "poling": -1}, {"material": "air", "length_m": 3e-9}]}
  ])");
  const RunConfig c = parse_config(j);
  REQUIRE(c.structure->layer_count() == 7);
  CHECK_THAT(c.structure->length(1), WithinRel(1e-9, 1e-15));
  for (int r = 0; r < 3; ++r) {
    CHECK(c.structure->medium(2 + 2 * r).name() == "X");
    CHECK(c.structure->poling(2 + 2 * r) == -1);
    CHECK_THAT(c.structure->length(3 + 2 * r), WithinRel(3e-9, 1e-15));
  }
}

TEST_CASE("configuration hash") {
  const json a = minimal();
  CHECK(config_hash(a) == config_hash(minimal()));
  json b = a;
  b["pump"]["energy_per_area_J_per_m2"] = 2e3;
  CHECK(config_hash(a) != config_hash(b));
  // key order in the source text does not matter
  const json c = json::parse(R"({"b": 1, "a": 2})"), d = json::parse(R"({"a": 2, "b": 1})");
  CHECK(config_hash(c) == config_hash(d));
  // 64-bit FNV-1a of "{}"
  CHECK(config_hash(json::object()) == "9bf65e00c699fdaf");
}
