#pragma once

// Dense complex matrix whose rows and columns carry (field, slot, bin) labels.

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace spdc {

/// Mode slots (amplitudes) and continuity slots (boundary equations).
enum class Slot { Fx = 0, Bx = 1, Fy = 2, By = 3, Ex = 0, Ey = 1, Hx = 2, Hy = 3 };

inline constexpr int index(Slot s) { return static_cast<int>(s); }

inline constexpr Slot mode_slot(Dir d, Pol p) { return static_cast<Slot>(2 * index(p) + index(d)); }

enum class SpaceKind { Mode, Continuity };

struct Label {
  Field field;
  int slot;  // 0..3, meaning given by the space kind
  int bin;
};

/// Super-space [s: 4 slots x Ks | i^dagger: 4 slots x Ki], slot-major within a field.
class IndexSpace {
 public:
  IndexSpace() = default;
  IndexSpace(SpaceKind kind, int ks, int ki) : kind_(kind), ks_(ks), ki_(ki) {}
  static IndexSpace modes(int ks, int ki) { return {SpaceKind::Mode, ks, ki}; }
  static IndexSpace continuity(int ks, int ki) { return {SpaceKind::Continuity, ks, ki}; }

  SpaceKind kind() const { return kind_; }
  int bins(Field f) const { return f == Field::Signal ? ks_ : ki_; }
  int field_offset(Field f) const { return f == Field::Signal ? 0 : 4 * ks_; }
  int field_size(Field f) const { return 4 * bins(f); }
  int size() const { return 4 * (ks_ + ki_); }

  int offset(Field f, int slot) const { return field_offset(f) + slot * bins(f); }
  int at(const Label& l) const {
    if (l.slot < 0 || l.slot > 3 || l.bin < 0 || l.bin >= bins(l.field)) throw Error("label outside index space");
    return offset(l.field, l.slot) + l.bin;
  }
  Label label(int i) const {
    if (i < 0 || i >= size()) throw Error("index outside index space");
    Field f = i < 4 * ks_ ? Field::Signal : Field::Idler;
    int r = i - field_offset(f);
    return {f, r / bins(f), r % bins(f)};
  }
  std::string name(int i) const {
    static const char* mode_names[] = {"Fx", "Bx", "Fy", "By"};
    static const char* cont_names[] = {"Ex", "Ey", "Hx", "Hy"};
    Label l = label(i);
    std::string s = l.field == Field::Signal ? "s" : "i+";
    return s + ":" + (kind_ == SpaceKind::Mode ? mode_names : cont_names)[l.slot] + ":" + std::to_string(l.bin);
  }

  bool operator==(const IndexSpace& o) const { return kind_ == o.kind_ && ks_ == o.ks_ && ki_ == o.ki_; }

 private:
  SpaceKind kind_ = SpaceKind::Mode;
  int ks_ = 0, ki_ = 0;
};

class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(IndexSpace rows, IndexSpace cols)
      : rows_(rows), cols_(cols), data_(Eigen::MatrixXcd::Zero(rows.size(), cols.size())) {}
  BlockMatrix(IndexSpace rows, IndexSpace cols, Eigen::MatrixXcd data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.rows() != rows_.size() || data_.cols() != cols_.size()) throw Error("BlockMatrix: data shape mismatch");
  }

  static BlockMatrix identity(IndexSpace space) {
    return BlockMatrix(space, space, Eigen::MatrixXcd::Identity(space.size(), space.size()));
  }

  const IndexSpace& rows() const { return rows_; }
  const IndexSpace& cols() const { return cols_; }
  const Eigen::MatrixXcd& data() const { return data_; }
  Eigen::MatrixXcd& data() { return data_; }

  cplx operator()(const Label& r, const Label& c) const { return data_(rows_.at(r), cols_.at(c)); }

  /// Field-by-field sub-matrix (4K_r x 4K_c).
  auto field_block(Field r, Field c) {
    return data_.block(rows_.field_offset(r), cols_.field_offset(c), rows_.field_size(r), cols_.field_size(c));
  }
  auto field_block(Field r, Field c) const {
    return data_.block(rows_.field_offset(r), cols_.field_offset(c), rows_.field_size(r), cols_.field_size(c));
  }

  /// Slot-by-slot sub-matrix (K_r x K_c).
  auto block(Field r, int rs, Field c, int cs) {
    return data_.block(rows_.offset(r, rs), cols_.offset(c, cs), rows_.bins(r), cols_.bins(c));
  }
  auto block(Field r, int rs, Field c, int cs) const {
    return data_.block(rows_.offset(r, rs), cols_.offset(c, cs), rows_.bins(r), cols_.bins(c));
  }

  BlockMatrix operator*(const BlockMatrix& o) const {
    if (!(cols_ == o.rows_)) throw Error("BlockMatrix: incompatible index spaces in product");
    return BlockMatrix(rows_, o.cols_, data_ * o.data_);
  }
  BlockMatrix operator+(const BlockMatrix& o) const {
    if (!(rows_ == o.rows_) || !(cols_ == o.cols_)) throw Error("BlockMatrix: incompatible index spaces in sum");
    return BlockMatrix(rows_, cols_, data_ + o.data_);
  }
  BlockMatrix operator-(const BlockMatrix& o) const {
    if (!(rows_ == o.rows_) || !(cols_ == o.cols_)) throw Error("BlockMatrix: incompatible index spaces in difference");
    return BlockMatrix(rows_, cols_, data_ - o.data_);
  }
  BlockMatrix operator*(cplx s) const { return BlockMatrix(rows_, cols_, data_ * s); }

  double norm() const { return data_.norm(); }
  bool all_finite() const { return data_.allFinite(); }

  /// CSV with a header of column labels and a leading row-label column; entries as re,im pairs.
  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "row";
    for (int j = 0; j < cols_.size(); ++j) os << ',' << cols_.name(j) << ":re," << cols_.name(j) << ":im";
    os << '\n';
    for (int i = 0; i < rows_.size(); ++i) {
      os << rows_.name(i);
      for (int j = 0; j < cols_.size(); ++j) os << ',' << data_(i, j).real() << ',' << data_(i, j).imag();
      os << '\n';
    }
  }

 private:
  IndexSpace rows_, cols_;
  Eigen::MatrixXcd data_;
};

/// Relative Frobenius distance |a - b| / max(|a|, |b|), zero when both vanish.
inline double relative_difference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

}  // namespace spdc
