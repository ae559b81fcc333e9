#ifndef FRAISSE_LINALG_HPP
#define FRAISSE_LINALG_HPP

#include "fraisse/rational.hpp"

#include <optional>
#include <vector>

namespace fraisse {

/// Reduced row echelon form of a matrix over an exact field.
template <typename Scalar>
struct RowEchelon {
  MatrixX<Scalar> reduced;
  std::vector<Index> pivot_columns;
  Index rank() const { return static_cast<Index>(pivot_columns.size()); }
};

template <typename Scalar>
RowEchelon<Scalar> row_reduce(MatrixX<Scalar> m) {
  RowEchelon<Scalar> out;
  Index row = 0;
  for (Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Index pivot = -1;
    for (Index r = row; r < m.rows(); ++r)
      if (m(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    if (pivot != row) m.row(pivot).swap(m.row(row));
    const Scalar inv = Scalar(1) / m(row, col);
    m.row(row) *= inv;
    for (Index r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col) == 0) continue;
      const Scalar factor = m(r, col);
      m.row(r) -= factor * m.row(row);
    }
    out.pivot_columns.push_back(col);
    ++row;
  }
  out.reduced = std::move(m);
  return out;
}

template <typename Scalar>
Index rank(const MatrixX<Scalar>& m) {
  return row_reduce<Scalar>(m).rank();
}

/// Columns form a basis of {x : m x = 0}.
template <typename Scalar>
MatrixX<Scalar> kernel_basis(const MatrixX<Scalar>& m) {
  const auto ech = row_reduce<Scalar>(m);
  std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
  for (Index c : ech.pivot_columns) is_pivot[static_cast<std::size_t>(c)] = true;
  MatrixX<Scalar> basis(m.cols(), m.cols() - ech.rank());
  Index k = 0;
  for (Index free = 0; free < m.cols(); ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    VectorX<Scalar> v = VectorX<Scalar>::Zero(m.cols());
    v(free) = 1;
    for (Index r = 0; r < ech.rank(); ++r) v(ech.pivot_columns[static_cast<std::size_t>(r)]) = -ech.reduced(r, free);
    basis.col(k++) = v;
  }
  return basis;
}

/// Some solution of m x = rhs, or nullopt when the system is inconsistent.
template <typename Scalar>
std::optional<VectorX<Scalar>> solve_exact(const MatrixX<Scalar>& m, const VectorX<Scalar>& rhs) {
  MatrixX<Scalar> aug(m.rows(), m.cols() + 1);
  aug.leftCols(m.cols()) = m;
  aug.col(m.cols()) = rhs;
  const auto ech = row_reduce<Scalar>(aug);
  if (!ech.pivot_columns.empty() && ech.pivot_columns.back() == m.cols()) return std::nullopt;
  VectorX<Scalar> x = VectorX<Scalar>::Zero(m.cols());
  for (Index r = 0; r < ech.rank(); ++r) x(ech.pivot_columns[static_cast<std::size_t>(r)]) = ech.reduced(r, m.cols());
  return x;
}

/// Basis of the column space, taken from the original columns.
template <typename Scalar>
MatrixX<Scalar> column_space_basis(const MatrixX<Scalar>& m) {
  const auto ech = row_reduce<Scalar>(m);
  MatrixX<Scalar> basis(m.rows(), ech.rank());
  for (Index k = 0; k < ech.rank(); ++k) basis.col(k) = m.col(ech.pivot_columns[static_cast<std::size_t>(k)]);
  return basis;
}

template <typename Scalar>
bool same_column_space(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  if (a.rows() != b.rows()) return false;
  MatrixX<Scalar> joint(a.rows(), a.cols() + b.cols());
  joint.leftCols(a.cols()) = a;
  joint.rightCols(b.cols()) = b;
  const Index r = rank<Scalar>(joint);
  return r == rank<Scalar>(a) && r == rank<Scalar>(b);
}

}  // namespace fraisse

#endif  // FRAISSE_LINALG_HPP
