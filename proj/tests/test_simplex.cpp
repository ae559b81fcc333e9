#include "doctest.h"

#include "fraisse/polytope.hpp"
#include "fraisse/simplex.hpp"
#include "oracles.hpp"

using namespace fraisse;

TEST_CASE("small LP by hand") {
  // min -x - y s.t. x + 2y <= 4, 3x + y <= 6
  LinearProgram<Rational> lp;
  auto x = lp.add_variable(-1);
  auto y = lp.add_variable(-1);
  lp.add_constraint({{x, 1}, {y, 2}}, Relation::less_equal, 4);
  lp.add_constraint({{x, 3}, {y, 1}}, Relation::less_equal, 6);
  auto r = lp.minimize();
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == Rational(-14, 5));
  CHECK(r.x(0) == Rational(8, 5));
  CHECK(r.x(1) == Rational(6, 5));
}

TEST_CASE("infeasible and unbounded") {
  LinearProgram<Rational> lp;
  auto x = lp.add_variable(1);
  lp.add_constraint({{x, 1}}, Relation::less_equal, -1);
  CHECK(lp.minimize().status == LpStatus::infeasible);

  LinearProgram<Rational> lp2;
  auto y = lp2.add_variable(-1);
  lp2.add_constraint({{y, 1}}, Relation::greater_equal, 1);
  CHECK(lp2.minimize().status == LpStatus::unbounded);

  LinearProgram<Rational> lp3;
  auto z = lp3.add_variable(1, true);
  lp3.add_constraint({{z, 1}}, Relation::greater_equal, -3);
  auto r = lp3.minimize();
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x(0) == -3);
}

TEST_CASE("redundant and degenerate constraints") {
  MatrixXq a(3, 3);
  a << 1, 1, 1, 2, 2, 2, 1, 0, 0;
  VectorXq b(3), c(3);
  b << 1, 2, 0;
  c << 1, 2, 3;
  auto r = minimize_standard<Rational>(a, b, c);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == 2);
}

TEST_CASE("simplex agrees with basic-solution enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-3, 3);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Index m = 1 + trial % 3, n = m + 1 + trial % 3;
    MatrixXq a(m, n);
    VectorXq b(m), c(n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) a(i, j) = coef(rng);
    // A bounding row keeps every feasible region compact.
    a.row(0).setOnes();
    for (Index i = 0; i < m; ++i) b(i) = coef(rng);
    b(0) = 1 + trial % 4;
    for (Index j = 0; j < n; ++j) c(j) = coef(rng);
    auto r = minimize_standard<Rational>(a, b, c);
    auto o = oracle::lp_by_bases(a, b, c);
    CHECK(r.status != LpStatus::unbounded);
    if (!o) {
      CHECK(r.status == LpStatus::infeasible);
      continue;
    }
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == *o);
    CHECK(exactly_equal(a * r.x, b));
    CHECK(r.x.minCoeff() >= 0);
    ++compared;
  }
  CHECK(compared > 40);
}

TEST_CASE("vertices of the cross-polytope and the cube") {
  // |x| + |y| <= 1 as four half-spaces: vertices (+-1, 0), (0, +-1).
  MatrixXq h(4, 2);
  h << 1, 1, 1, -1, -1, 1, -1, -1;
  auto v = vertices_of_unit_halfspaces<Rational>(h);
  CHECK(v.size() == 4);
  // The cube [-1,1]^3 has 8 vertices.
  MatrixXq cube(6, 3);
  cube << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  CHECK(vertices_of_unit_halfspaces<Rational>(cube).size() == 8);
  // Facets of the symmetric hull of the unit vectors in R^3: the octahedron has 8.
  MatrixXq e = MatrixXq::Identity(3, 3);
  auto f = facets_of_symmetric_hull<Rational>(e);
  CHECK(f.size() == 8);
  for (const auto& n : f)
    for (Index i = 0; i < 3; ++i) CHECK(abs(n(i)) == 1);
}
