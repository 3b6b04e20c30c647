#pragma once

// Block matrices of the boundary-matching formalism and the structure-level emission operators.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bin_blocks.hpp"
#include "block_matrix.hpp"
#include "parallel.hpp"
#include "spectral.hpp"

namespace spdc {

inline constexpr double kConditionWarning = 1e12;

struct Overlap {
  Eigen::MatrixXcd ie;    // 1/sqrt(n)
  Eigen::MatrixXcd ih_f;  // i k_F / sqrt(n)
  Eigen::MatrixXcd ih_b;  // i k_B / sqrt(n)
};

/// Overlap matrices of medium l on a top-hat basis (diagonal, midpoint rule).
/// The pol argument is kept for anisotropic extensions; media here are isotropic.
inline Overlap overlap_matrices(const StructureSpec& s, int l, const SpectralBasis& basis, Field, Pol) {
  const int k = basis.size();
  const MaterialModel& m = s.medium(l);
  Overlap o{Eigen::MatrixXcd::Zero(k, k), Eigen::MatrixXcd::Zero(k, k), Eigen::MatrixXcd::Zero(k, k)};
  for (int j = 0; j < k; ++j) {
    const double w = basis.center(j);
    const double rn = 1.0 / std::sqrt(m.refractive_index(w));
    o.ie(j, j) = rn;
    o.ih_f(j, j) = kI * m.wavenumber(w, Dir::F) * rn;
    o.ih_b(j, j) = kI * m.wavenumber(w, Dir::B) * rn;
  }
  return o;
}

namespace detail {

inline int e_row(Pol p) { return index(p); }
inline int h_row(Pol p) { return 2 + index(p); }
inline int mode_col(Dir d, Pol p) { return index(mode_slot(d, p)); }

/// Interface matrix of one field (4K x 4K), conjugated for the idler^dagger block.
inline Eigen::MatrixXcd field_L(const StructureSpec& s, int l, const SpectralBasis& basis, Field f) {
  const int k = basis.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4 * k, 4 * k);
  for (Pol p : kPols) {
    const Overlap o = overlap_matrices(s, l, basis, f, p);
    out.block(e_row(p) * k, mode_col(Dir::F, p) * k, k, k) = o.ie;
    out.block(e_row(p) * k, mode_col(Dir::B, p) * k, k, k) = o.ie;
    out.block(h_row(p) * k, mode_col(Dir::F, p) * k, k, k) = o.ih_f;
    out.block(h_row(p) * k, mode_col(Dir::B, p) * k, k, k) = o.ih_b;
  }
  return f == Field::Idler ? Eigen::MatrixXcd(out.conjugate()) : out;
}

inline Eigen::MatrixXcd field_P(const StructureSpec& s, int l, const SpectralBasis& basis, Field f) {
  const int k = basis.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4 * k, 4 * k);
  const double len = s.length(l);
  if (len == 0.0) return Eigen::MatrixXcd::Identity(4 * k, 4 * k);
  const MaterialModel& m = s.medium(l);
  for (Pol p : kPols)
    for (Dir d : kDirs)
      for (int j = 0; j < k; ++j) {
        const int i = mode_col(d, p) * k + j;
        const cplx e = std::exp(kI * m.wavenumber(basis.center(j), d) * len);
        out(i, i) = f == Field::Idler ? std::conj(e) : e;
      }
  return out;
}

/// Projector on the forward (or backward) slots of a 4K mode space.
inline Eigen::MatrixXcd dir_projector(int k, Dir d) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4 * k, 4 * k);
  for (Pol p : kPols) out.block(mode_col(d, p) * k, mode_col(d, p) * k, k, k).setIdentity();
  return out;
}

inline BlockMatrix assemble(IndexSpace rows, IndexSpace cols, const Eigen::MatrixXcd& s_block,
                            const Eigen::MatrixXcd& i_block) {
  BlockMatrix out(rows, cols);
  out.field_block(Field::Signal, Field::Signal) = s_block;
  out.field_block(Field::Idler, Field::Idler) = i_block;
  return out;
}

inline double condition_estimate(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
  const double rc = lu.rcond();
  return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

/// U and V of the input-output relation for one field, from T^{(N+1,0)}.
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> field_UV(const Eigen::MatrixXcd& t, int k) {
  const Eigen::MatrixXcd pf = dir_projector(k, Dir::F), pb = dir_projector(k, Dir::B);
  return {pf - t * pb, t * pf - pb};
}

}  // namespace detail

/// Interface transition matrix L^{(l)} in the super-space (continuity rows x mode columns).
inline BlockMatrix interface_transition_L(const StructureSpec& s, int l, const SpectralBasis& bs,
                                          const SpectralBasis& bi) {
  return detail::assemble(IndexSpace::continuity(bs.size(), bi.size()), IndexSpace::modes(bs.size(), bi.size()),
                          detail::field_L(s, l, bs, Field::Signal), detail::field_L(s, l, bi, Field::Idler));
}

/// Free propagation across medium l (identity for the ambient media).
inline BlockMatrix layer_propagator_P(const StructureSpec& s, int l, const SpectralBasis& bs,
                                      const SpectralBasis& bi) {
  const auto sp = IndexSpace::modes(bs.size(), bi.size());
  return detail::assemble(sp, sp, detail::field_P(s, l, bs, Field::Signal), detail::field_P(s, l, bi, Field::Idler));
}

/// T^{(n,m)} = L^{(n)-1} (prod_{l=m+1}^{n-1} L^{(l)} P^{(l)} L^{(l)-1}) L^{(m)}.
inline BlockMatrix transfer_compose(const StructureSpec& s, int n, int m, const SpectralBasis& bs,
                                    const SpectralBasis& bi) {
  if (!(n > m) || m < 0 || n > s.media_count() - 1) throw Error("transfer_compose: need 0 <= m < n <= N+1");
  auto field = [&](const SpectralBasis& b, Field f) {
    Eigen::MatrixXcd c = detail::field_L(s, m, b, f);
    for (int l = m + 1; l <= n - 1; ++l) {
      const Eigen::MatrixXcd lm = detail::field_L(s, l, b, f);
      c = lm * detail::field_P(s, l, b, f) * lm.partialPivLu().solve(c);
    }
    return Eigen::MatrixXcd(detail::field_L(s, n, b, f).partialPivLu().solve(c));
  };
  const auto sp = IndexSpace::modes(bs.size(), bi.size());
  return detail::assemble(sp, sp, field(bs, Field::Signal), field(bi, Field::Idler));
}

/// Input-output matrix F = U^{-1} V mapping [Fx(0), Bx(N+1), Fy(0), By(N+1)] to
/// [Fx(N+1), Bx(0), Fy(N+1), By(0)], field by field.
inline BlockMatrix input_output_F(const BlockMatrix& t_full) {
  const IndexSpace& sp = t_full.rows();
  BlockMatrix out(sp, sp);
  for (Field f : {Field::Signal, Field::Idler}) {
    const int k = sp.bins(f);
    if (k == 0) continue;
    auto [u, v] = detail::field_UV(t_full.field_block(f, f), k);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(u);
    if (!(std::abs(lu.determinant()) > 0.0)) throw SingularMatrix("input-output matrix U is singular");
    out.field_block(f, f) = lu.solve(v);
  }
  return out;
}

/// Feed-in matrix W: amplitudes in medium 0 in terms of the input operators.
inline BlockMatrix feed_in_W(const BlockMatrix& f_full) {
  const IndexSpace& sp = f_full.rows();
  BlockMatrix out(sp, sp);
  for (Field f : {Field::Signal, Field::Idler}) {
    const int k = sp.bins(f);
    out.field_block(f, f) = detail::dir_projector(k, Dir::F) + detail::dir_projector(k, Dir::B) * f_full.field_block(f, f);
  }
  return out;
}

enum class Contribution { V = 0, S = 1 };

struct ModelOptions {
  bool electric_only = false;  // ablation: drop the magnetic source rows
  double source_scale = 1.0;   // multiplies every source coefficient (mutation checks)
  int workers = 1;
};

struct EmissionOperators {
  BlockMatrix G_V;
  BlockMatrix G_S;
  BlockMatrix F_linear;
  std::vector<std::string> warnings;
};

namespace detail {

/// Per-bin form of field_L.
inline BinBlocks bin_L(const StructureSpec& s, int l, const SpectralBasis& basis, Field f) {
  const MaterialModel& m = s.medium(l);
  BinBlocks out(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const double w = basis.center(j);
    const double rn = 1.0 / std::sqrt(m.refractive_index(w));
    const cplx hf = kI * m.wavenumber(w, Dir::F) * rn, hb = kI * m.wavenumber(w, Dir::B) * rn;
    for (Pol p : kPols) {
      out[j](e_row(p), mode_col(Dir::F, p)) = rn;
      out[j](e_row(p), mode_col(Dir::B, p)) = rn;
      out[j](h_row(p), mode_col(Dir::F, p)) = hf;
      out[j](h_row(p), mode_col(Dir::B, p)) = hb;
    }
  }
  return f == Field::Idler ? out.conjugate() : out;
}

inline BinBlocks bin_P(const StructureSpec& s, int l, const SpectralBasis& basis, Field f) {
  BinBlocks out = BinBlocks::identity(basis.size());
  const double len = s.length(l);
  if (len == 0.0) return out;
  const MaterialModel& m = s.medium(l);
  for (int j = 0; j < basis.size(); ++j)
    for (Pol p : kPols)
      for (Dir d : kDirs) {
        const cplx e = std::exp(kI * m.wavenumber(basis.center(j), d) * len);
        out[j](mode_col(d, p), mode_col(d, p)) = f == Field::Idler ? std::conj(e) : e;
      }
  return out;
}

inline BinBlocks bin_projector(int k, Dir d) {
  BinBlocks out(k);
  for (int j = 0; j < k; ++j)
    for (Pol p : kPols) out[j](mode_col(d, p), mode_col(d, p)) = 1.0;
  return out;
}

}  // namespace detail

/// Holds every per-medium matrix of one structure/pump/basis and composes the emission operators.
/// Linear matrices never mix bins, so they are kept as per-bin 4x4 blocks; only J couples bins.
class EmissionModel {
 public:
  EmissionModel(StructureSpec s, PumpField pump, SpectralBasis bs, SpectralBasis bi, ModelOptions opt = {})
      : s_(std::move(s)), pump_(std::move(pump)), bases_{std::move(bs), std::move(bi)}, opt_(opt) {
    const int media = s_.media_count();
    for (Field f : {Field::Signal, Field::Idler}) {
      const int fi = index(f);
      const SpectralBasis& b = bases_[fi];
      const int k = b.size();
      L_[fi].resize(media);
      P_[fi].resize(media);
      T_[fi].resize(media);
      PT_[fi].resize(media);
      n_[fi].assign(media, std::vector<double>(k));
      for (int l = 0; l < media; ++l) {
        L_[fi][l] = detail::bin_L(s_, l, b, f);
        P_[fi][l] = detail::bin_P(s_, l, b, f);
        for (int j = 0; j < k; ++j) n_[fi][l][j] = s_.medium(l).refractive_index(b.center(j));
      }
      T_[fi][0] = BinBlocks::identity(k);
      PT_[fi][0] = T_[fi][0];
      for (int l = 1; l < media; ++l) {
        T_[fi][l] = inverse(L_[fi][l], "L^(" + std::to_string(l) + ")") * (L_[fi][l - 1] * PT_[fi][l - 1]);
        PT_[fi][l] = P_[fi][l] * T_[fi][l];
      }
      const BinBlocks pf = detail::bin_projector(k, Dir::F), pb = detail::bin_projector(k, Dir::B);
      const BinBlocks& t = T_[fi][media - 1];
      F_[fi] = inverse(pf - t * pb, "U", "structure-degenerate: U is singular") * (t * pf - pb);
      W_[fi] = pf + pb * F_[fi];
      Tinv_[fi] = inverse(t, "T^(N+1,0)");
    }
    coupling_[0].resize(media);
    coupling_[1].resize(media);
    parallel_for(2 * media, opt_.workers, [&](int job) {
      const int fi = job % 2, l = job / 2;
      const Field f = static_cast<Field>(fi);
      if (l >= 1 && l <= s_.layer_count())
        coupling_[fi][l] = project_to_basis(s_, l, bases_[fi], bases_[1 - fi], pump_, f);
    });
  }

  const StructureSpec& structure() const { return s_; }
  const PumpField& pump() const { return pump_; }
  const SpectralBasis& basis(Field f) const { return bases_[index(f)]; }
  IndexSpace mode_space() const { return IndexSpace::modes(bases_[0].size(), bases_[1].size()); }
  IndexSpace continuity_space() const { return IndexSpace::continuity(bases_[0].size(), bases_[1].size()); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const CouplingBlocks& coupling(Field emitter, int l) const { return coupling_[index(emitter)].at(l); }

  BlockMatrix L(int l) const { return pair(continuity_space(), L_[0].at(l), L_[1].at(l)); }
  BlockMatrix P(int l) const { return pair(mode_space(), P_[0].at(l), P_[1].at(l)); }
  /// T^{(l,0)}: medium-0 amplitudes to medium-l amplitudes (left-boundary referenced).
  BlockMatrix T(int l) const { return pair(mode_space(), T_[0].at(l), T_[1].at(l)); }
  /// P^{(l)} T^{(l,0)}: amplitudes at the right boundary of medium l.
  BlockMatrix T_tilde(int l) const { return pair(mode_space(), PT_[0].at(l), PT_[1].at(l)); }
  BlockMatrix F() const { return pair(mode_space(), F_[0], F_[1]); }
  BlockMatrix W() const { return pair(mode_space(), W_[0], W_[1]); }
  BlockMatrix Z() const { return pair(mode_space(), F_[0].inverse(), F_[1].inverse()); }
  BlockMatrix U() const { return uv(true); }
  BlockMatrix V() const { return uv(false); }

  /// Outward map X(z_l): forward rows from T^{(l,0)}, backward rows from P^{(l-1)} T^{(l-1,0)}.
  BlockMatrix X(int l) const {
    check_boundary(l);
    auto field = [&](int fi) {
      const int k = bases_[fi].size();
      return detail::bin_projector(k, Dir::F) * T_[fi][l] + detail::bin_projector(k, Dir::B) * PT_[fi][l - 1];
    };
    return pair(mode_space(), field(0), field(1));
  }
  /// Y: output operators to medium-0 amplitudes, forward rows through Z, backward rows identity.
  BlockMatrix Y() const {
    auto field = [&](int fi) {
      const int k = bases_[fi].size();
      return detail::bin_projector(k, Dir::F) * F_[fi].inverse() + detail::bin_projector(k, Dir::B);
    };
    return pair(mode_space(), field(0), field(1));
  }

  /// J_a^{(m)} evaluated at z_m (side 0) or z_{m+1} (side 1); signal rows couple to idler^dagger
  /// columns and idler^dagger rows to signal columns.
  BlockMatrix J(int m, int side, Dir a) const {
    BlockMatrix out(continuity_space(), mode_space());
    out.field_block(Field::Signal, Field::Idler) = field_J(m, side, a, Field::Signal);
    out.field_block(Field::Idler, Field::Signal) = field_J(m, side, a, Field::Idler);
    return out;
  }

  /// Exact jump operator at boundary l: output operators to the discontinuity they produce.
  BlockMatrix jump_operator(int l) const {
    check_boundary(l);
    return pair(continuity_space(), field_M(l, 0), field_M(l, 1));
  }

  /// Pair-source matrix S^{(l,l-1),kind}: input operators to first-order output operators.
  BlockMatrix S(int l, Contribution kind) const {
    check_boundary(l);
    BlockMatrix out(mode_space(), mode_space());
    for (Field f : {Field::Signal, Field::Idler})
      out.field_block(f, partner(f)) = field_S(l, kind, f, field_M(l, index(f)).inverse());
    return out;
  }

  EmissionOperators G() const {
    const int nb = s_.layer_count() + 1;
    std::vector<std::array<Eigen::MatrixXcd, 4>> parts(nb);
    parallel_for(nb, opt_.workers, [&](int j) {
      const int l = j + 1;
      for (Field f : {Field::Signal, Field::Idler}) {
        const BinBlocks minv = field_M(l, index(f)).inverse();
        for (int w = 0; w < 2; ++w) parts[j][2 * w + index(f)] = field_S(l, static_cast<Contribution>(w), f, minv);
      }
    });
    EmissionOperators ops{BlockMatrix(mode_space(), mode_space()), BlockMatrix(mode_space(), mode_space()), F(),
                          warnings_};
    for (int j = 0; j < nb; ++j)
      for (Field f : {Field::Signal, Field::Idler}) {
        ops.G_V.field_block(f, partner(f)) += parts[j][index(f)];
        ops.G_S.field_block(f, partner(f)) += parts[j][2 + index(f)];
      }
    if (!ops.G_V.all_finite() || !ops.G_S.all_finite() || !ops.F_linear.all_finite())
      throw SingularMatrix("non-finite emission operator");
    return ops;
  }

 private:
  void check_boundary(int l) const {
    if (l < 1 || l > s_.layer_count() + 1) throw Error("boundary index outside 1..N+1");
  }

  BinBlocks inverse(const BinBlocks& m, const std::string& what, const char* singular = nullptr) {
    double cond = 0.0;
    BinBlocks out;
    try {
      out = m.inverse(&cond);
    } catch (const SingularMatrix&) {
      throw SingularMatrix(singular ? singular : ("singular " + what));
    }
    if (cond > kConditionWarning) {
      std::ostringstream os;
      os << "ill-conditioned " << what << " (condition ~ " << cond << ")";
      warnings_.push_back(os.str());
    }
    return out;
  }

  static BlockMatrix pair(IndexSpace rows, const BinBlocks& s, const BinBlocks& i) {
    return detail::assemble(rows, IndexSpace::modes(s.bins(), i.bins()), s.dense(), i.dense());
  }

  BlockMatrix uv(bool want_u) const {
    const int last = s_.media_count() - 1;
    auto field = [&](int fi) {
      const int k = bases_[fi].size();
      const BinBlocks pf = detail::bin_projector(k, Dir::F), pb = detail::bin_projector(k, Dir::B);
      const BinBlocks& t = T_[fi][last];
      return want_u ? pf - t * pb : t * pf - pb;
    };
    return pair(mode_space(), field(0), field(1));
  }

  /// Emitter rows [E_x, E_y, H_x, H_y] against partner mode columns.
  Eigen::MatrixXcd field_J(int m, int side, Dir a, Field emitter) const {
    const int fe = index(emitter), fp = 1 - fe;
    const int ke = bases_[fe].size(), kp = bases_[fp].size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4 * ke, 4 * kp);
    if (m < 1 || m > s_.layer_count()) return out;
    const CouplingBlocks& cb = coupling_[fe][m];
    if (cb.linear) return out;
    const MaterialModel& mat = s_.medium(m);
    const double zl = s_.z(m), len = s_.length(m);
    const double z = side == 0 ? zl : zl + len;
    const double za = a == Dir::F ? zl : zl + len;
    for (Dir b : kDirs)
      for (Pol pe : kPols)
        for (Pol pp : kPols) {
          const Eigen::MatrixXcd& le = cb.e(side, a, b, pe, pp);
          const Eigen::MatrixXcd& lh = cb.h(side, a, b, pe, pp);
          if (le.isZero(0.0) && lh.isZero(0.0)) continue;
          const int col = detail::mode_col(b, pp) * kp;
          for (int k = 0; k < ke; ++k) {
            const double k_e = mat.wavenumber(bases_[fe].center(k), a);
            const double weight = opt_.source_scale / std::sqrt(n_[fe][m][k]);
            const cplx pe_phase = std::exp(kI * k_e * (z - za));
            for (int n = 0; n < kp; ++n) {
              const double k_p = mat.wavenumber(bases_[fp].center(n), b);
              const cplx phase = pe_phase * std::exp(kI * k_p * (z - zl));
              cplx ce = le(k, n) * phase;
              cplx ch = (lh(k, n) + kI * k_e * le(k, n)) * phase;
              if (emitter == Field::Idler) {
                ce = std::conj(ce);
                ch = std::conj(ch);
              }
              out(detail::e_row(pe) * ke + k, col + n) = weight * ce;
              if (!opt_.electric_only) out(detail::h_row(pe) * ke + k, col + n) = weight * ch;
            }
          }
        }
    return out;
  }

  /// Per-field jump operator: -L^{(l)} T^{(l,0)} T^{(N+1,0)-1} P_F + L^{(l-1)} P^{(l-1)} T^{(l-1,0)} P_B.
  BinBlocks field_M(int l, int fi) const {
    const int k = bases_[fi].size();
    const BinBlocks pf = detail::bin_projector(k, Dir::F), pb = detail::bin_projector(k, Dir::B);
    return BinBlocks(k) - L_[fi][l] * T_[fi][l] * Tinv_[fi] * pf + L_[fi][l - 1] * PT_[fi][l - 1] * pb;
  }

  Eigen::MatrixXcd field_S(int l, Contribution kind, Field f, const BinBlocks& m_inverse) const {
    const int fi = index(f), fo = 1 - fi;
    const Dir left_dir = kind == Contribution::V ? Dir::F : Dir::B;
    const Dir right_dir = kind == Contribution::V ? Dir::B : Dir::F;
    const Eigen::MatrixXcd jl = field_J(l - 1, 1, left_dir, f);
    const Eigen::MatrixXcd jr = field_J(l, 0, right_dir, f);
    const int ko = bases_[fo].size();
    if (jl.isZero(0.0) && jr.isZero(0.0)) return Eigen::MatrixXcd::Zero(4 * bases_[fi].size(), 4 * ko);
    const Eigen::MatrixXcd src = PT_[fo][l - 1].right_multiply(-jl) + T_[fo][l].right_multiply(jr);
    return m_inverse.left_multiply(W_[fo].right_multiply(src));
  }

  StructureSpec s_;
  PumpField pump_;
  std::array<SpectralBasis, 2> bases_;
  ModelOptions opt_;
  std::array<std::vector<BinBlocks>, 2> L_, P_, T_, PT_;
  std::array<BinBlocks, 2> F_, W_, Tinv_;
  std::array<std::vector<std::vector<double>>, 2> n_;
  std::array<std::vector<CouplingBlocks>, 2> coupling_;
  std::vector<std::string> warnings_;
};

/// Convenience wrapper building the model and returning G_V, G_S and F.
inline EmissionOperators total_emission_G(const StructureSpec& s, const PumpField& pump, const SpectralBasis& bs,
                                          const SpectralBasis& bi, ModelOptions opt = {}) {
  return EmissionModel(s, pump, bs, bi, opt).G();
}

}  // namespace spdc
