#pragma once

#include <vector>

#include "spdc/linear_optics.hpp"
#include "spdc/materials.hpp"
#include "spdc/structure.hpp"

namespace fixtures {

using namespace spdc;

inline MaterialModel gan(double d = 4e-12) {
  std::map<PolTriple, double> chi;
  if (d != 0.0) chi[parse_pol_triple("y;xy")] = d;
  return MaterialModel("GaN", Sellmeier{3.6, {{1.75, 0.256 * 0.256}, {4.1, 17.86 * 17.86}}}, chi, 0.3e-6, 9.5e-6);
}

inline MaterialModel aln() {
  return MaterialModel("AlN", Sellmeier{3.1399, {{1.3786, 0.1715 * 0.1715}, {3.861, 15.03 * 15.03}}}, {}, 0.3e-6,
                       9.5e-6);
}

inline MaterialModel air() { return MaterialModel::constant("air", 1.0); }

/// periods x (GaN l1 / AlN l2) in air.
inline StructureSpec gan_aln(int periods, double l1 = 60e-9, double l2 = 13e-9) {
  std::vector<Layer> ls;
  for (int p = 0; p < periods; ++p) {
    ls.push_back({gan(), l1, 1});
    ls.push_back({aln(), l2, 1});
  }
  return StructureSpec(air(), ls, air());
}

inline PumpSpec pump(double lambda = 400e-9, double fwhm = 7e-9, double energy = 1e3) {
  PumpSpec p;
  p.omega0 = omega_from_wavelength(lambda);
  p.sigma = PumpSpec::sigma_from_fwhm_wavelength(lambda, fwhm);
  p.energy_per_area = energy;
  return p;
}

}  // namespace fixtures
