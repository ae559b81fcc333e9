#include "fraisse/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace fraisse {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den))
    throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
  using boost::multiprecision::mpz_int;
  mpz_int n{std::string(num)};
  mpz_int d{std::string(den)};
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  Rational value(n, d);
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  const auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

VectorXq parse_rational_list(std::string_view text) {
  std::vector<Rational> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    items.push_back(parse_rational(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  VectorXq v(static_cast<Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v(static_cast<Index>(i)) = items[i];
  return v;
}

VectorXq unit_vector(Index dim, Index i) {
  VectorXq v = VectorXq::Zero(dim);
  v(i) = 1;
  return v;
}

}  // namespace fraisse
