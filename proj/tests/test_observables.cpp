#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "spdc/observables.hpp"

using namespace spdc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXcd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

/// Field-block-diagonal F and field-off-diagonal G with random entries.
std::pair<BlockMatrix, BlockMatrix> random_fg(int ks, int ki, std::mt19937_64& rng) {
  const IndexSpace sp = IndexSpace::modes(ks, ki);
  BlockMatrix f(sp, sp), g(sp, sp);
  f.field_block(Field::Signal, Field::Signal) = random_matrix(4 * ks, 4 * ks, rng);
  f.field_block(Field::Idler, Field::Idler) = random_matrix(4 * ki, 4 * ki, rng);
  g.field_block(Field::Signal, Field::Idler) = random_matrix(4 * ks, 4 * ki, rng);
  g.field_block(Field::Idler, Field::Signal) = random_matrix(4 * ki, 4 * ks, rng);
  return {f, g};
}

MaterialModel symmetric_gan() {
  std::map<PolTriple, double> chi{{parse_pol_triple("y;xy"), 4e-12}, {parse_pol_triple("y;yx"), 4e-12}};
  return MaterialModel("GaN", Sellmeier{3.6, {{1.75, 0.256 * 0.256}, {4.1, 17.86 * 17.86}}}, chi, 0.3e-6, 9.5e-6);
}

struct Run {
  SpectralBasis b;
  EmissionOperators ops;
};

Run run(const StructureSpec& s, int k) {
  const SpectralBasis b = SpectralBasis::relative(fixtures::pump().omega0, 0.05, 0.95, k);
  const EmissionModel m(s, propagate_pump(s, fixtures::pump(), pump_grid(b, b)), b, b);
  return {b, m.G()};
}

std::vector<double> to_vec(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

double rms_width(const std::vector<double>& t, const std::vector<double>& p) {
  double w = 0.0, m = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    w += p[j];
    m += p[j] * t[j];
    m2 += p[j] * t[j] * t[j];
  }
  m /= w;
  return std::sqrt(m2 / w - m * m);
}

}  // namespace

TEST_CASE("branch factors agree with an explicit loop") {
  std::mt19937_64 rng(5);
  const int ks = 3, ki = 4;
  const SpectralBasis bs(1.0e15, 1.6e15, ks), bi(0.8e15, 1.1e15, ki);
  const auto [f, g] = random_fg(ks, ki, rng);
  const IndexSpace sp = f.rows();
  for (Dir a : kDirs)
    for (Dir b : kDirs)
      for (Pol al : kPols)
        for (Pol be : kPols) {
          const Channel ch{a, b, al, be};
          const BranchFactors bf = branch_amplitudes(g, f, ch, bs, bi);
          const int ra = index(mode_slot(a, al)), rb = index(mode_slot(b, be));
          for (int k = 0; k < ks; ++k)
            for (int n = 0; n < ki; ++n) {
              cplx x{}, y{};
              for (int slot = 0; slot < 4; ++slot) {
                for (int m = 0; m < ki; ++m)
                  x += std::conj(f({Field::Idler, rb, n}, {Field::Idler, slot, m})) *
                       g({Field::Signal, ra, k}, {Field::Idler, slot, m});
                for (int m = 0; m < ks; ++m)
                  y += f({Field::Signal, ra, k}, {Field::Signal, slot, m}) *
                       std::conj(g({Field::Idler, rb, n}, {Field::Signal, slot, m}));
              }
              const double w = std::sqrt(bs.width(k) * bi.width(n));
              CHECK(std::abs(bf.idler_branch(k, n) - x / w) <= 1e-12 * std::abs(x / w));
              CHECK(std::abs(bf.signal_branch(k, n) - y / w) <= 1e-12 * std::abs(y / w));
            }
        }
  (void)sp;
  CHECK_THROWS_AS(branch_amplitudes(g, f, {}, bi, bs), Error);
}

TEST_CASE("identity scattering reads the emission operator directly") {
  std::mt19937_64 rng(8);
  const int k = 3;
  const SpectralBasis b(1.0e15, 1.3e15, k);
  auto [f, g] = random_fg(k, k, rng);
  f = BlockMatrix::identity(f.rows());
  const Channel ch{Dir::F, Dir::B, Pol::X, Pol::Y};
  const BranchFactors bf = branch_amplitudes(g, f, ch, b, b);
  const double w = b.width(0);
  for (int s = 0; s < k; ++s)
    for (int i = 0; i < k; ++i) {
      CHECK(std::abs(bf.idler_branch(s, i) - g({Field::Signal, index(Slot::Fx), s}, {Field::Idler, index(Slot::By), i}) / w) < 1e-30);
      CHECK(std::abs(bf.signal_branch(s, i) -
                     std::conj(g({Field::Idler, index(Slot::By), i}, {Field::Signal, index(Slot::Fx), s})) / w) < 1e-30);
    }
}

TEST_CASE("zero emission gives zero densities and undefined ratios") {
  const SpectralBasis b(1.0e15, 1.3e15, 4);
  const IndexSpace sp = IndexSpace::modes(4, 4);
  const BranchFactors z = branch_amplitudes(BlockMatrix(sp, sp), BlockMatrix::identity(sp), {}, b, b);
  const JointDensity jd = joint_density(z, z);
  CHECK(jd.SV.abs().maxCoeff() == 0.0);
  const Marginals m = marginals_and_counts(jd, b, b);
  CHECK(m.N_SV == 0.0);
  CHECK_FALSE(m.R_defined);
  for (bool d : m.eta_defined) CHECK_FALSE(d);
}

TEST_CASE("density decomposition in special cases") {
  std::mt19937_64 rng(2);
  const SpectralBasis b(1.0e15, 1.3e15, 5);
  const auto [f, g] = random_fg(5, 5, rng);
  const BranchFactors v = branch_amplitudes(g, f, {}, b, b);
  const JointDensity same = joint_density(v, v);
  CHECK(((same.I - 2.0 * same.V).abs() <= 1e-14 * same.V.abs().maxCoeff()).all());
  CHECK(((same.SV - 4.0 * same.V).abs() <= 1e-14 * same.V.abs().maxCoeff()).all());

  const IndexSpace sp = f.rows();
  const BranchFactors zero = branch_amplitudes(BlockMatrix(sp, sp), f, {}, b, b);
  const JointDensity only_v = joint_density(v, zero);
  CHECK((only_v.SV == only_v.V).all());
  CHECK(only_v.S.abs().maxCoeff() == 0.0);
  CHECK(only_v.I.abs().maxCoeff() == 0.0);
}

TEST_CASE("marginals, counts and the surface-to-volume ratio") {
  const SpectralBasis bs(1.0e15, 1.4e15, 4), bi(0.9e15, 1.2e15, 3);
  JointDensity jd;
  jd.V = Eigen::ArrayXXd::Constant(4, 3, 2.0);
  jd.S = Eigen::ArrayXXd::Zero(4, 3);
  jd.I = Eigen::ArrayXXd::Zero(4, 3);
  jd.SV = jd.V;
  Marginals m = marginals_and_counts(jd, bs, bi);
  const double dws = bs.width(0), dwi = bi.width(0);
  CHECK_THAT(m.ns_V(2), WithinRel(2.0 * 3 * dwi, 1e-14));
  CHECK_THAT(m.N_V, WithinRel(2.0 * 12 * dws * dwi, 1e-14));
  CHECK(m.R_defined);
  CHECK(m.R == 0.0);

  jd.S = jd.V;
  jd.SV = 4.0 * jd.V;
  m = marginals_and_counts(jd, bs, bi);
  CHECK_THAT(m.R, WithinRel(1.0, 1e-15));
  for (int k = 0; k < 4; ++k) CHECK_THAT(m.eta(k), WithinRel(1.0, 1e-15));

  jd.V.row(1).setConstant(1e-20);
  m = marginals_and_counts(jd, bs, bi);
  CHECK_FALSE(m.eta_defined[1]);
  CHECK(m.eta(1) == 0.0);
  CHECK(m.eta_defined[0]);
}

TEST_CASE("structure densities: total amplitude and exchange symmetry") {
  const auto g = symmetric_gan();
  const StructureSpec s(fixtures::air(), {{g, 60e-9, 1}, {fixtures::aln(), 13e-9, 1}, {g, 60e-9, 1}},
                        fixtures::air());
  const Run r = run(s, 10);
  const BlockMatrix total = r.ops.G_V + r.ops.G_S;
  for (const Channel ch : {Channel{Dir::F, Dir::B, Pol::X, Pol::Y}, Channel{Dir::F, Dir::F, Pol::X, Pol::Y}}) {
    const BranchFactors t = branch_amplitudes(total, r.ops.F_linear, ch, r.b, r.b);
    CHECK(relative_difference(t.idler_branch, t.signal_branch) < 1e-10);
    const Channel swapped{ch.b, ch.a, ch.beta, ch.alpha};
    const BranchFactors u = branch_amplitudes(total, r.ops.F_linear, swapped, r.b, r.b);
    CHECK(relative_difference(t.idler_branch, u.idler_branch.transpose()) < 1e-10);
  }
}

TEST_CASE("decomposition identity on a layered structure") {
  const Run r = run(fixtures::gan_aln(2), 10);
  const Channel ch{Dir::F, Dir::F, Pol::X, Pol::Y};
  const BranchFactors v = branch_amplitudes(r.ops.G_V, r.ops.F_linear, ch, r.b, r.b);
  const BranchFactors s = branch_amplitudes(r.ops.G_S, r.ops.F_linear, ch, r.b, r.b);
  const JointDensity jd = joint_density(v, s, ch);
  const double scale = jd.SV.abs().maxCoeff();
  CHECK((jd.SV - jd.V - jd.S - jd.I).abs().maxCoeff() <= 1e-12 * scale);
  const JointSpectralAmplitude a = two_photon_amplitude(v, s, ch);
  CHECK(((a.total.cwiseAbs2().array() - jd.SV).abs() <= 1e-10 * scale).all());
}

TEST_CASE("per-contribution amplitude squares to the volume density") {
  const Run r = run(fixtures::gan_aln(2), 10);
  const Channel ch{Dir::F, Dir::F, Pol::X, Pol::Y};
  const BranchFactors v = branch_amplitudes(r.ops.G_V, r.ops.F_linear, ch, r.b, r.b);
  const BranchFactors s = branch_amplitudes(r.ops.G_S, r.ops.F_linear, ch, r.b, r.b);
  const JointDensity jd = joint_density(v, s, ch);
  const JointSpectralAmplitude a = two_photon_amplitude(v, s, ch);
  const double nv = jd.V.sum(), pv = a.V.cwiseAbs2().sum();
  INFO("sum |phi_V|^2 = " << pv << ", sum n_V = " << nv);
  CHECK(std::abs(pv - nv) <= 1e-10 * nv);
}

TEST_CASE("temporal profile of a single bin is flat") {
  const SpectralBasis b(1.0e15, 1.4e15, 8);
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(8, 8);
  phi(3, 5) = cplx(2.0, -1.0);
  const TemporalProfile tp = temporal_profiles(phi, b, b, {256, 0.0, 0.0});
  CHECK(tp.p.maxCoeff() / tp.p.minCoeff() - 1.0 < 1e-10);
  CHECK_THAT(tp.p.sum() * tp.dt_s * tp.dt_i, WithinRel(1.0, 1e-12));
}

TEST_CASE("temporal profile of a Gaussian amplitude") {
  const double w0 = 1.0e15, half = 0.2e15;
  const SpectralBasis b(w0 - half, w0 + half, 64);
  const double sp = 0.15 * half, sm = 0.3 * half;
  Eigen::MatrixXcd phi(64, 64);
  for (int k = 0; k < 64; ++k)
    for (int n = 0; n < 64; ++n) {
      const double u = b.center(k) + b.center(n) - 2.0 * w0, v = b.center(k) - b.center(n);
      phi(k, n) = std::exp(-u * u / (2 * sp * sp) - v * v / (2 * sm * sm));
    }
  const TemporalProfile tp = temporal_profiles(phi, b, b);
  const double a = sp * sp / 4, c = sm * sm / 4;
  const double s = std::sqrt((a + c) / (8 * a * c));
  CHECK_THAT(rms_width(tp.ts, tp.ps), WithinRel(s, 1e-4));
  const double mass = tp.p.sum() * tp.dt_s * tp.dt_i;
  CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
  CHECK(parseval_residual(phi, b, b, tp) < 1e-8);
  // FWHM of a Gaussian flux is 2 sqrt(2 ln 2) sigma
  CHECK_THAT(width_fwhm(tp.ts, tp.ps).width, WithinRel(2 * std::sqrt(2 * std::log(2.0)) * s, 1e-3));
}

TEST_CASE("temporal grid limits") {
  const SpectralBasis b(1.0e15, 1.4e15, 8);
  const Eigen::MatrixXcd phi = Eigen::MatrixXcd::Ones(8, 8);
  const double period = 2 * kPi / b.width(0);
  CHECK_THROWS_AS(temporal_profiles(phi, b, b, {256, -period, period}), GridTooCoarse);
  CHECK_THROWS_AS(temporal_profiles(phi, b, b, {4, 0.0, 0.0}), GridTooCoarse);
  CHECK_NOTHROW(temporal_profiles(phi, b, b, {64, -0.4 * period, 0.4 * period}));
  CHECK_THROWS_AS(temporal_profiles(Eigen::MatrixXcd::Zero(8, 8), b, b), NoPeak);
}

TEST_CASE("full width at half maximum") {
  std::vector<double> x, tri, gauss, two;
  for (int j = -400; j <= 800; ++j) {
    const double t = 0.01 * j;
    x.push_back(t);
    tri.push_back(std::max(0.0, 1.0 - std::abs(t)));
    gauss.push_back(std::exp(-t * t / 2));
    two.push_back(std::exp(-t * t / 2) + 0.3 * std::exp(-(t - 5) * (t - 5) / (2 * 0.25)));
  }
  CHECK_THAT(width_fwhm(x, tri).width, WithinAbs(1.0, 1e-12));
  const WidthResult g = width_fwhm(x, gauss);
  CHECK_THAT(g.width, WithinRel(2 * std::sqrt(2 * std::log(2.0)), 1e-3));
  CHECK(std::abs(g.peak) < 1e-12);
  CHECK_FALSE(g.secondary_peak);
  const WidthResult t = width_fwhm(x, two);
  CHECK_THAT(t.width, WithinRel(2 * std::sqrt(2 * std::log(2.0)), 1e-3));
  REQUIRE(t.secondary_peak);
  CHECK_THAT(*t.secondary_peak, WithinAbs(5.0, 0.011));
  REQUIRE(t.secondary_width);
  CHECK_THAT(*t.secondary_width, WithinRel(2 * std::sqrt(2 * std::log(2.0)) * 0.5, 1e-2));

  CHECK_THROWS_AS(width_fwhm(x, std::vector<double>(x.size(), 1.0)), NoPeak);
  std::vector<double> ramp;
  for (double t : x) ramp.push_back(1.0 + 0.01 * t);
  CHECK_THROWS_AS(width_fwhm(x, ramp), NoPeak);
  CHECK_THROWS_AS(width_fwhm({0.0, 1.0}, {0.0, 1.0}), NoPeak);
}
