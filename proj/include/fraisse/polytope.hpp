#ifndef FRAISSE_POLYTOPE_HPP
#define FRAISSE_POLYTOPE_HPP

// Exact vertex and facet enumeration for small polytopes containing the origin
// in their interior. Brute force over d-subsets of constraints; intended for d <= 4.

#include "fraisse/linalg.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace fraisse {

template <typename Scalar>
struct LexLess {
  bool operator()(const VectorX<Scalar>& a, const VectorX<Scalar>& b) const {
    for (Index i = 0; i < a.size(); ++i) {
      if (a(i) < b(i)) return true;
      if (b(i) < a(i)) return false;
    }
    return false;
  }
};

/// Vertices of {x : h.row(k) . x <= 1 for all k}. The region must be bounded.
template <typename Scalar>
std::vector<VectorX<Scalar>> vertices_of_unit_halfspaces(const MatrixX<Scalar>& h) {
  const Index d = h.cols();
  std::set<VectorX<Scalar>, LexLess<Scalar>> unique_rows;
  for (Index k = 0; k < h.rows(); ++k) unique_rows.insert(h.row(k).transpose());
  const std::vector<VectorX<Scalar>> rows(unique_rows.begin(), unique_rows.end());
  const Index n = static_cast<Index>(rows.size());

  std::set<VectorX<Scalar>, LexLess<Scalar>> found;
  if (d == 0) return {};
  std::vector<Index> pick(static_cast<std::size_t>(d));
  auto feasible = [&](const VectorX<Scalar>& x) {
    for (const auto& r : rows)
      if (r.dot(x) > 1) return false;
    return true;
  };
  // Recursive enumeration keeping the chosen rows linearly independent.
  std::vector<VectorX<Scalar>> echelon;  // reduced copies of chosen rows
  std::vector<Index> lead;
  auto reduce = [&](VectorX<Scalar> v) {
    for (std::size_t k = 0; k < echelon.size(); ++k)
      if (v(lead[k]) != 0) v -= v(lead[k]) * echelon[k];
    return v;
  };
  auto recurse = [&](auto&& self, Index start, Index depth) -> void {
    if (depth == d) {
      MatrixX<Scalar> sys(d, d);
      for (Index k = 0; k < d; ++k) sys.row(k) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].transpose();
      auto x = solve_exact<Scalar>(sys, VectorX<Scalar>::Ones(d));
      if (x && feasible(*x)) found.insert(*x);
      return;
    }
    for (Index i = start; i <= n - (d - depth); ++i) {
      VectorX<Scalar> v = reduce(rows[static_cast<std::size_t>(i)]);
      Index l = -1;
      for (Index j = 0; j < d; ++j)
        if (v(j) != 0) {
          l = j;
          break;
        }
      if (l < 0) continue;
      v /= v(l);
      auto saved = echelon;
      for (std::size_t k = 0; k < echelon.size(); ++k)
        if (echelon[k](l) != 0) echelon[k] -= echelon[k](l) * v;
      echelon.push_back(v);
      lead.push_back(l);
      pick[static_cast<std::size_t>(depth)] = i;
      self(self, i + 1, depth + 1);
      echelon = std::move(saved);
      lead.pop_back();
    }
  };
  recurse(recurse, 0, 0);
  return {found.begin(), found.end()};
}

/// Facet normals h (facet = {x : h.x = 1}) of conv{+-p : p column of points}.
/// The hull must be full dimensional.
template <typename Scalar>
std::vector<VectorX<Scalar>> facets_of_symmetric_hull(const MatrixX<Scalar>& points) {
  MatrixX<Scalar> polar(2 * points.cols(), points.rows());
  for (Index k = 0; k < points.cols(); ++k) {
    polar.row(2 * k) = points.col(k).transpose();
    polar.row(2 * k + 1) = -points.col(k).transpose();
  }
  return vertices_of_unit_halfspaces<Scalar>(polar);
}

}  // namespace fraisse

#endif  // FRAISSE_POLYTOPE_HPP
