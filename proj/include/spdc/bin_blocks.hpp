#pragma once

// Per-bin 4x4 blocks of a linear super-matrix. With disjoint top-hat bins the linear
// matrices never couple different bins, so a 4K x 4K matrix (slot-major layout) is
// represented by K independent 4x4 blocks.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace spdc {

class BinBlocks {
 public:
  using Block = Eigen::Matrix4cd;

  BinBlocks() = default;
  explicit BinBlocks(int bins, const Block& fill = Block::Zero()) : b_(bins, fill) {}

  static BinBlocks identity(int bins) { return BinBlocks(bins, Block::Identity()); }

  int bins() const { return static_cast<int>(b_.size()); }
  Block& operator[](int k) { return b_[k]; }
  const Block& operator[](int k) const { return b_[k]; }

  /// Slot-major dense form: index(slot, bin) = slot * K + bin.
  Eigen::MatrixXcd dense() const {
    const int k = bins();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4 * k, 4 * k);
    for (int j = 0; j < k; ++j)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) d(r * k + j, c * k + j) = b_[j](r, c);
    return d;
  }

  BinBlocks operator*(const BinBlocks& o) const {
    check(o);
    BinBlocks r(bins());
    for (int j = 0; j < bins(); ++j) r[j] = b_[j] * o[j];
    return r;
  }
  BinBlocks operator+(const BinBlocks& o) const {
    check(o);
    BinBlocks r(bins());
    for (int j = 0; j < bins(); ++j) r[j] = b_[j] + o[j];
    return r;
  }
  BinBlocks operator-(const BinBlocks& o) const {
    check(o);
    BinBlocks r(bins());
    for (int j = 0; j < bins(); ++j) r[j] = b_[j] - o[j];
    return r;
  }
  BinBlocks conjugate() const {
    BinBlocks r(bins());
    for (int j = 0; j < bins(); ++j) r[j] = b_[j].conjugate();
    return r;
  }

  /// Block-wise inverse; throws SingularMatrix for a singular block. `condition` receives the
  /// largest per-block condition estimate.
  BinBlocks inverse(double* condition = nullptr) const {
    BinBlocks r(bins());
    double worst = 0.0;
    for (int j = 0; j < bins(); ++j) {
      Eigen::PartialPivLU<Block> lu(b_[j]);
      if (!(std::abs(lu.determinant()) > 0.0)) throw SingularMatrix("singular 4x4 bin block");
      const double rc = lu.rcond();
      worst = std::max(worst, rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
      r[j] = lu.inverse();
    }
    if (condition) *condition = worst;
    return r;
  }

  /// dense (R x 4K) * this.
  Eigen::MatrixXcd right_multiply(const Eigen::MatrixXcd& d) const {
    const int k = bins();
    if (d.cols() != 4 * k) throw Error("BinBlocks: dimension mismatch");
    Eigen::MatrixXcd out(d.rows(), d.cols());
    Eigen::MatrixXcd cols(d.rows(), 4);
    for (int j = 0; j < k; ++j) {
      for (int s = 0; s < 4; ++s) cols.col(s) = d.col(s * k + j);
      const Eigen::MatrixXcd res = cols * b_[j];
      for (int s = 0; s < 4; ++s) out.col(s * k + j) = res.col(s);
    }
    return out;
  }

  /// this * dense (4K x C).
  Eigen::MatrixXcd left_multiply(const Eigen::MatrixXcd& d) const {
    const int k = bins();
    if (d.rows() != 4 * k) throw Error("BinBlocks: dimension mismatch");
    Eigen::MatrixXcd out(d.rows(), d.cols());
    Eigen::MatrixXcd rows(4, d.cols());
    for (int j = 0; j < k; ++j) {
      for (int s = 0; s < 4; ++s) rows.row(s) = d.row(s * k + j);
      const Eigen::MatrixXcd res = b_[j] * rows;
      for (int s = 0; s < 4; ++s) out.row(s * k + j) = res.row(s);
    }
    return out;
  }

 private:
  void check(const BinBlocks& o) const {
    if (o.bins() != bins()) throw Error("BinBlocks: bin count mismatch");
  }
  std::vector<Block> b_;
};

}  // namespace spdc
