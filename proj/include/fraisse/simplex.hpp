#ifndef FRAISSE_SIMPLEX_HPP
#define FRAISSE_SIMPLEX_HPP

// Exact two-phase primal simplex on a dense tableau with Bland's rule.
// Works over any exact ordered field; every LP in the library runs over Rational.

#include "fraisse/rational.hpp"

#include <utility>
#include <vector>

namespace fraisse {

enum class LpStatus { optimal, infeasible, unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Scalar objective{};
  VectorX<Scalar> x;
};

namespace detail {

template <typename Scalar>
class Tableau {
 public:
  // Rows 0..m-1 hold B^{-1}[A | b]; row m holds reduced costs and -objective.
  Tableau(MatrixX<Scalar> body, std::vector<Index> basis) : t_(std::move(body)), basis_(std::move(basis)) {}

  Index rows() const { return t_.rows() - 1; }
  Index rhs() const { return t_.cols() - 1; }
  MatrixX<Scalar>& data() { return t_; }
  const MatrixX<Scalar>& data() const { return t_; }
  std::vector<Index>& basis() { return basis_; }

  void pivot(Index r, Index c) {
    const Scalar inv = Scalar(1) / t_(r, c);
    std::vector<Index> nz;
    for (Index j = 0; j < t_.cols(); ++j) {
      if (t_(r, j) == 0) continue;
      t_(r, j) *= inv;
      nz.push_back(j);
    }
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r || t_(i, c) == 0) continue;
      const Scalar f = t_(i, c);
      for (Index j : nz) t_(i, j) -= f * t_(r, j);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Runs Bland-rule iterations over columns [0, allowed). Returns false if unbounded.
  bool optimize(Index allowed) {
    const Index obj = rows();
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j)
        if (t_(obj, j) < 0) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      Index leave = -1;
      Scalar best;
      for (Index i = 0; i < obj; ++i) {
        if (t_(i, enter) <= 0) continue;
        Scalar ratio = t_(i, rhs()) / t_(i, enter);
        if (leave < 0 || ratio < best ||
            (ratio == best && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

 private:
  MatrixX<Scalar> t_;
  std::vector<Index> basis_;
};

}  // namespace detail

/// minimize c.x subject to A x = b, x >= 0.
template <typename Scalar>
LpResult<Scalar> minimize_standard(const MatrixX<Scalar>& a, const VectorX<Scalar>& b, const VectorX<Scalar>& c) {
  const Index m = a.rows();
  const Index n = a.cols();
  LpResult<Scalar> result;

  // Phase 1: one artificial per row, rows flipped so b >= 0.
  MatrixX<Scalar> body = MatrixX<Scalar>::Zero(m + 1, n + m + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const bool flip = b(i) < 0;
    for (Index j = 0; j < n; ++j) body(i, j) = flip ? Scalar(-a(i, j)) : a(i, j);
    body(i, n + i) = 1;
    body(i, n + m) = flip ? Scalar(-b(i)) : b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) body(m, j) -= body(i, j);
    body(m, n + m) -= body(i, n + m);
  }
  detail::Tableau<Scalar> phase1(std::move(body), std::move(basis));
  phase1.optimize(n + m);
  if (phase1.data()(m, n + m) != 0) return result;

  // Drive remaining artificials out of the basis; drop redundant rows.
  std::vector<Index> keep;
  for (Index i = 0; i < m; ++i) {
    if (phase1.basis()[static_cast<std::size_t>(i)] >= n) {
      Index col = -1;
      for (Index j = 0; j < n; ++j)
        if (phase1.data()(i, j) != 0) {
          col = j;
          break;
        }
      if (col < 0) continue;
      phase1.pivot(i, col);
    }
    keep.push_back(i);
  }

  // Phase 2 on the original columns.
  const Index m2 = static_cast<Index>(keep.size());
  MatrixX<Scalar> body2 = MatrixX<Scalar>::Zero(m2 + 1, n + 1);
  std::vector<Index> basis2(static_cast<std::size_t>(m2));
  for (Index k = 0; k < m2; ++k) {
    const Index i = keep[static_cast<std::size_t>(k)];
    body2.row(k).head(n) = phase1.data().row(i).head(n);
    body2(k, n) = phase1.data()(i, n + m);
    basis2[static_cast<std::size_t>(k)] = phase1.basis()[static_cast<std::size_t>(i)];
  }
  for (Index j = 0; j < n; ++j) body2(m2, j) = c(j);
  for (Index k = 0; k < m2; ++k) {
    const Scalar cb = c(basis2[static_cast<std::size_t>(k)]);
    if (cb == 0) continue;
    for (Index j = 0; j <= n; ++j)
      if (body2(k, j) != 0) body2(m2, j) -= cb * body2(k, j);
  }
  detail::Tableau<Scalar> phase2(std::move(body2), std::move(basis2));
  if (!phase2.optimize(n)) {
    result.status = LpStatus::unbounded;
    return result;
  }
  result.status = LpStatus::optimal;
  result.x = VectorX<Scalar>::Zero(n);
  for (Index k = 0; k < m2; ++k) result.x(phase2.basis()[static_cast<std::size_t>(k)]) = phase2.data()(k, n);
  result.objective = -phase2.data()(m2, n);
  return result;
}

enum class Relation { equal, less_equal, greater_equal };

/// Small modelling layer over minimize_standard: free variables are split into
/// positive and negative parts, inequalities get slack columns.
template <typename Scalar>
class LinearProgram {
 public:
  Index add_variable(Scalar cost, bool free = false) {
    vars_.push_back({std::move(cost), free});
    return static_cast<Index>(vars_.size()) - 1;
  }

  void add_constraint(std::vector<std::pair<Index, Scalar>> terms, Relation rel, Scalar rhs) {
    rows_.push_back({std::move(terms), rel, std::move(rhs)});
  }

  Index variable_count() const { return static_cast<Index>(vars_.size()); }

  LpResult<Scalar> minimize() const {
    std::vector<Index> column_of(vars_.size());
    Index cols = 0;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      column_of[v] = cols;
      cols += vars_[v].free ? 2 : 1;
    }
    const Index structural = cols;
    for (const auto& row : rows_)
      if (row.rel != Relation::equal) ++cols;

    const Index m = static_cast<Index>(rows_.size());
    MatrixX<Scalar> a = MatrixX<Scalar>::Zero(m, cols);
    VectorX<Scalar> b(m);
    VectorX<Scalar> c = VectorX<Scalar>::Zero(cols);
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      c(column_of[v]) = vars_[v].cost;
      if (vars_[v].free) c(column_of[v] + 1) = -vars_[v].cost;
    }
    Index slack = structural;
    for (Index i = 0; i < m; ++i) {
      const auto& row = rows_[static_cast<std::size_t>(i)];
      for (const auto& [var, coef] : row.terms) {
        const Index col = column_of[static_cast<std::size_t>(var)];
        a(i, col) += coef;
        if (vars_[static_cast<std::size_t>(var)].free) a(i, col + 1) -= coef;
      }
      b(i) = row.rhs;
      if (row.rel == Relation::less_equal) a(i, slack++) = 1;
      if (row.rel == Relation::greater_equal) a(i, slack++) = -1;
    }
    auto raw = minimize_standard<Scalar>(a, b, c);
    LpResult<Scalar> out;
    out.status = raw.status;
    out.objective = raw.objective;
    if (raw.status != LpStatus::optimal) return out;
    out.x = VectorX<Scalar>(static_cast<Index>(vars_.size()));
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      const Index col = column_of[v];
      out.x(static_cast<Index>(v)) = vars_[v].free ? Scalar(raw.x(col) - raw.x(col + 1)) : raw.x(col);
    }
    return out;
  }

 private:
  struct Variable {
    Scalar cost;
    bool free;
  };
  struct Row {
    std::vector<std::pair<Index, Scalar>> terms;
    Relation rel;
    Scalar rhs;
  };
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

}  // namespace fraisse

#endif  // FRAISSE_SIMPLEX_HPP
