#ifndef FRAISSE_RATIONAL_HPP
#define FRAISSE_RATIONAL_HPP

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace fraisse {

/// Exact rational scalar. GMP keeps every value canonical (lowest terms,
/// positive denominator). Expression templates are off so the type composes
/// cleanly with Eigen.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXq = MatrixX<Rational>;
using VectorXq = VectorX<Rational>;
using Index = Eigen::Index;

/// Parses "num/den" or "num" (optional leading '-'). Throws std::invalid_argument
/// on anything else, including a zero denominator. No decimal or float syntax.
Rational parse_rational(std::string_view text);

/// Inverse of parse_rational: "num/den", or "num" when the denominator is 1.
std::string format_rational(const Rational& value);

/// Comma separated list of rationals, e.g. "1,-1/2,0".
VectorXq parse_rational_list(std::string_view text);

inline Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

inline Rational numerator_of(const Rational& x) { return Rational(boost::multiprecision::numerator(x)); }
inline Rational denominator_of(const Rational& x) { return Rational(boost::multiprecision::denominator(x)); }

/// Exact equality for dense rational arrays of any shape.
template <typename Derived, typename OtherDerived>
bool exactly_equal(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<OtherDerived>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

VectorXq unit_vector(Index dim, Index i);

}  // namespace fraisse

#endif  // FRAISSE_RATIONAL_HPP
