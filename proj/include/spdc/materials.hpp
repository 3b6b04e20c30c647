#pragma once

// Dispersion and second-order susceptibility of lossless dielectric layers.

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace spdc {

struct ConstantIndex {
  double n = 1.0;
};

/// n^2 = a0 + sum_j b_j lambda^2 / (lambda^2 - c_j), lambda in micrometres, c_j in um^2.
struct Sellmeier {
  double a0 = 1.0;
  std::vector<std::pair<double, double>> terms;  // (b_j, c_j)
};

using Dispersion = std::variant<ConstantIndex, Sellmeier>;

/// Polarisation triple (pump gamma; signal alpha, idler beta).
struct PolTriple {
  Pol gamma = Pol::X;
  Pol alpha = Pol::X;
  Pol beta = Pol::X;
  auto operator<=>(const PolTriple&) const = default;
};

/// Parses "y;xy" into (gamma=y; alpha=x, beta=y).
inline PolTriple parse_pol_triple(const std::string& s) {
  auto pol = [&](char c) {
    if (c == 'x' || c == 'X') return Pol::X;
    if (c == 'y' || c == 'Y') return Pol::Y;
    throw ConfigError("bad polarisation '" + std::string(1, c) + "' in \"" + s + "\"");
  };
  std::string t;
  for (char c : s)
    if (c != ' ' && c != ',') t.push_back(c);
  if (t.size() != 4 || t[1] != ';')
    throw ConfigError("polarisation triple must look like \"y;xy\", got \"" + s + "\"");
  return {pol(t[0]), pol(t[2]), pol(t[3])};
}

class MaterialModel {
 public:
  MaterialModel() = default;

  /// Validity window given in vacuum wavelength (metres). Sellmeier poles inside
  /// the window, or n < 1 anywhere in it, are rejected.
  MaterialModel(std::string name, Dispersion dispersion, std::map<PolTriple, double> chi2 = {},
                double lambda_min = 1e-9, double lambda_max = 1.0)
      : name_(std::move(name)),
        dispersion_(std::move(dispersion)),
        chi2_(std::move(chi2)),
        lambda_min_(lambda_min),
        lambda_max_(lambda_max) {
    if (!(lambda_min_ > 0.0) || !(lambda_max_ > lambda_min_))
      throw ConfigError("material '" + name_ + "': invalid validity window");
    if (auto* c = std::get_if<ConstantIndex>(&dispersion_); c && !(c->n >= 1.0))
      throw ConfigError("material '" + name_ + "': constant index must be >= 1");
    if (auto* s = std::get_if<Sellmeier>(&dispersion_)) {
      const double l2min = std::pow(lambda_min_ * 1e6, 2), l2max = std::pow(lambda_max_ * 1e6, 2);
      for (auto [b, c] : s->terms) {
        if (b != 0.0 && c >= l2min && c <= l2max)
          throw ConfigError("material '" + name_ + "': Sellmeier pole inside validity window");
      }
      constexpr int kProbe = 2000;
      for (int j = 0; j <= kProbe; ++j) {
        const double lam = lambda_min_ * std::pow(lambda_max_ / lambda_min_, double(j) / kProbe);
        const double n2 = sellmeier_n2(*s, lam);
        if (!std::isfinite(n2) || n2 < 1.0)
          throw ConfigError("material '" + name_ + "': n < 1 inside validity window");
      }
    }
  }

  static MaterialModel constant(std::string name, double n, std::map<PolTriple, double> chi2 = {}) {
    return MaterialModel(std::move(name), ConstantIndex{n}, std::move(chi2));
  }

  const std::string& name() const { return name_; }
  const Dispersion& dispersion() const { return dispersion_; }
  const std::map<PolTriple, double>& chi2_map() const { return chi2_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  bool is_linear() const {
    for (auto& [k, v] : chi2_)
      if (v != 0.0) return false;
    return true;
  }

  bool in_window(double omega) const {
    if (!(omega > 0.0)) return false;
    const double lam = wavelength_from_omega(omega);
    return lam >= lambda_min_ && lam <= lambda_max_;
  }

  double refractive_index(double omega) const {
    if (!in_window(omega))
      throw OutOfWindow("material '" + name_ + "': omega=" + std::to_string(omega) +
                        " rad/s outside validity window");
    return std::visit(
        [&](const auto& d) -> double {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ConstantIndex>)
            return d.n;
          else
            return std::sqrt(sellmeier_n2(d, wavelength_from_omega(omega)));
        },
        dispersion_);
  }

  /// Signed wave number: +omega n / c forward, -omega n / c backward.
  double wavenumber(double omega, Dir d) const {
    return dir_sign(d) * omega * refractive_index(omega) / PhysicalConstants::c;
  }

  /// Contracted chi2 coefficient for (gamma; alpha, beta), zero when absent.
  double chi2_effective(Pol gamma, Pol alpha, Pol beta) const {
    auto it = chi2_.find(PolTriple{gamma, alpha, beta});
    return it == chi2_.end() ? 0.0 : it->second;
  }

 private:
  static double sellmeier_n2(const Sellmeier& s, double lambda_m) {
    const double l2 = std::pow(lambda_m * 1e6, 2);
    double n2 = s.a0;
    for (auto [b, c] : s.terms) n2 += b * l2 / (l2 - c);
    return n2;
  }

  std::string name_;
  Dispersion dispersion_ = ConstantIndex{};
  std::map<PolTriple, double> chi2_;
  double lambda_min_ = 1e-9;
  double lambda_max_ = 1.0;
};

/// Free functions mirroring the member API.
inline double refractive_index(const MaterialModel& m, double omega) { return m.refractive_index(omega); }
inline double wavenumber(const MaterialModel& m, double omega, Dir d) { return m.wavenumber(omega, d); }
inline double chi2_effective(const MaterialModel& m, Pol gamma, Pol alpha, Pol beta) {
  return m.chi2_effective(gamma, alpha, beta);
}

}  // namespace spdc
