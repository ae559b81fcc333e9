#include "doctest.h"

#include "fraisse/linalg.hpp"
#include "fraisse/rational.hpp"

#include <random>

using namespace fraisse;

TEST_CASE("parse and format rationals") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("-4/2") == Rational(-2));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(format_rational(parse_rational("10/4")) == "5/2");
  CHECK(format_rational(parse_rational("-7")) == "-7");
  CHECK(format_rational(Rational(0)) == "0");
  CHECK(format_rational(parse_rational("123456789012345678901234567890/3")) == "41152263004115226300411522630");
}

TEST_CASE("malformed rationals are rejected") {
  for (const char* bad : {"", "-", "1/", "/2", "1.5", "1e3", "+1", "1/0", "a", "1/2/3", " 1", "--1", "1/-2"})
    CHECK_THROWS_AS(parse_rational(bad), std::invalid_argument);
}

TEST_CASE("round trip on random values") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(-1000000, 1000000), den(1, 1000);
  for (int k = 0; k < 500; ++k) {
    Rational x(num(rng), den(rng));
    CHECK(parse_rational(format_rational(x)) == x);
    CHECK(denominator_of(x) > 0);
  }
}

TEST_CASE("rational lists") {
  auto v = parse_rational_list("1,-1/2,0");
  REQUIRE(v.size() == 3);
  CHECK(v(1) == Rational(-1, 2));
  CHECK_THROWS(parse_rational_list("1,,2"));
}

TEST_CASE("exact linear algebra") {
  MatrixXq m(2, 3);
  m << 1, 2, 3, 2, 4, 6;
  CHECK(rank<Rational>(m) == 1);
  MatrixXq k = kernel_basis<Rational>(m);
  CHECK(k.cols() == 2);
  CHECK(exactly_equal(m * k, MatrixXq::Zero(2, 2)));

  MatrixXq a(2, 2);
  a << 2, 1, 1, 3;
  VectorXq b(2);
  b << 3, 5;
  auto x = solve_exact<Rational>(a, b);
  REQUIRE(x);
  CHECK(exactly_equal(a * *x, b));
  CHECK((*x)(0) == Rational(4, 5));

  MatrixXq s(2, 2);
  s << 1, 1, 1, 1;
  VectorXq c(2);
  c << 1, 2;
  CHECK_FALSE(solve_exact<Rational>(s, c));

  MatrixXq p(3, 1), q(3, 2);
  p << 1, 1, 0;
  q << 2, 0, 2, 1, 0, 0;
  CHECK(same_column_space<Rational>(p, p * Rational(3)));
  CHECK_FALSE(same_column_space<Rational>(p, q));
}
