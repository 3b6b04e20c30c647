#include <catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"

using namespace spdc;
using Catch::Matchers::WithinRel;

TEST_CASE("constant index model returns its value everywhere") {
  const auto m = MaterialModel::constant("c2", 2.0);
  for (double lam : {300e-9, 800e-9, 5e-6}) CHECK(m.refractive_index(omega_from_wavelength(lam)) == 2.0);
}

TEST_CASE("Sellmeier with vanishing resonance terms reduces to sqrt(a0)") {
  const MaterialModel m("flat", Sellmeier{2.25, {{0.0, 0.1}, {0.0, 50.0}}});
  CHECK_THAT(m.refractive_index(omega_from_wavelength(633e-9)), WithinRel(1.5, 1e-15));
}

TEST_CASE("GaN Sellmeier at 400 nm matches direct formula evaluation") {
  const auto m = fixtures::gan();
  const double l2 = 0.4 * 0.4;
  const double n2 = 3.6 + 1.75 * l2 / (l2 - 0.256 * 0.256) + 4.1 * l2 / (l2 - 17.86 * 17.86);
  CHECK_THAT(m.refractive_index(omega_from_wavelength(400e-9)), WithinRel(std::sqrt(n2), 1e-14));
}

TEST_CASE("wavenumber sign and magnitude") {
  const auto m = MaterialModel::constant("c2", 2.0);
  const double w = omega_from_wavelength(400e-9);
  CHECK_THAT(m.wavenumber(w, Dir::F), WithinRel(2.0 * kPi * 2.0 / 400e-9, 1e-14));
  CHECK_THAT(m.wavenumber(w, Dir::F), WithinRel(3.14159e7, 1e-5));
  CHECK(m.wavenumber(w, Dir::B) == -m.wavenumber(w, Dir::F));
  const auto vac = MaterialModel::constant("vac", 1.0);
  CHECK_THAT(vac.wavenumber(omega_from_wavelength(1e-6), Dir::F), WithinRel(2.0 * kPi / 1e-6, 1e-14));
}

TEST_CASE("forward and backward wavenumbers are exact negatives") {
  const auto m = fixtures::aln();
  for (int j = 0; j < 50; ++j) {
    const double w = omega_from_wavelength(0.35e-6 + j * 0.1e-6);
    CHECK(m.wavenumber(w, Dir::F) == -m.wavenumber(w, Dir::B));
  }
}

TEST_CASE("chi2 lookup") {
  const auto lin = fixtures::aln();
  CHECK(lin.chi2_effective(Pol::Y, Pol::X, Pol::Y) == 0.0);
  CHECK(lin.is_linear());
  const auto g = fixtures::gan(3e-12);
  CHECK(g.chi2_effective(Pol::Y, Pol::X, Pol::Y) == 3e-12);
  CHECK(g.chi2_effective(Pol::X, Pol::X, Pol::X) == 0.0);
  CHECK(chi2_effective(g, Pol::Y, Pol::Y, Pol::X) == 0.0);
  const auto t = parse_pol_triple("y;xy");
  CHECK((t.gamma == Pol::Y && t.alpha == Pol::X && t.beta == Pol::Y));
  CHECK_THROWS_AS(parse_pol_triple("yxy"), ConfigError);
  CHECK_THROWS_AS(parse_pol_triple("z;xy"), ConfigError);
}

TEST_CASE("validity window is enforced") {
  const auto g = fixtures::gan();
  CHECK_THROWS_AS(g.refractive_index(omega_from_wavelength(250e-9)), OutOfWindow);
  CHECK_THROWS_AS(g.refractive_index(omega_from_wavelength(12e-6)), OutOfWindow);
  CHECK_THROWS_AS(g.refractive_index(0.0), OutOfWindow);
  CHECK_THROWS_AS(g.refractive_index(-1.0), OutOfWindow);
}

TEST_CASE("Sellmeier poles or n < 1 inside the window are rejected") {
  CHECK_THROWS_AS(MaterialModel("pole", Sellmeier{3.6, {{1.75, 0.256 * 0.256}}}, {}, 0.2e-6, 1e-6), ConfigError);
  CHECK_THROWS_AS(MaterialModel("low", Sellmeier{0.5, {}}, {}, 0.3e-6, 1e-6), ConfigError);
  CHECK_THROWS_AS(MaterialModel::constant("low", 0.9), ConfigError);
  CHECK_THROWS_AS(MaterialModel("bad", ConstantIndex{1.5}, {}, 1e-6, 0.5e-6), ConfigError);
}

TEST_CASE("Sellmeier values are finite and smooth across the window") {
  const auto g = fixtures::gan();
  double prev = g.refractive_index(omega_from_wavelength(0.3e-6));
  for (int j = 1; j <= 2000; ++j) {
    const double lam = 0.3e-6 * std::pow(9.5 / 0.3, j / 2000.0);
    const double n = g.refractive_index(omega_from_wavelength(lam));
    REQUIRE(std::isfinite(n));
    REQUIRE(n >= 1.0);
    REQUIRE(std::abs(n - prev) < 0.01);
    prev = n;
  }
}

TEST_CASE("physical constants are self-consistent") {
  using P = PhysicalConstants;
  CHECK_THAT(P::c, WithinRel(1.0 / std::sqrt(P::eps0 * P::mu0), 1e-9));
  CHECK(P::c == 299792458.0);
}
