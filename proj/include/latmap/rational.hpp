#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <sstream>
#include <string>

#include "latmap/errors.hpp"

namespace latmap {

// Arbitrary-precision rational, always in lowest terms with positive
// denominator. All arithmetic in the library is exact; no floating point
// enters outside the numeric evaluation layer.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Canonical text form: "p" or "p/q" with q > 0, gcd(|p|, q) = 1, minus sign
// (if any) on the numerator. This is the form used in every JSON document.
inline std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

namespace detail {
inline bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}
}  // namespace detail

// Strict parser for the canonical text form. Whitespace, '+' signs, empty
// parts and zero denominators are rejected.
inline Rational parse_rational(const std::string& text) {
  std::string num = text;
  std::string den = "1";
  if (auto slash = text.find('/'); slash != std::string::npos) {
    num = text.substr(0, slash);
    den = text.substr(slash + 1);
  }
  bool negative = !num.empty() && num.front() == '-';
  if (negative) num = num.substr(1);
  if (!detail::all_digits(num) || !detail::all_digits(den))
    throw ParseError("not a rational: '" + text + "'");
  BigInt p(num), q(den);
  if (q == 0) throw ParseError("zero denominator: '" + text + "'");
  if (negative) p = -p;
  return Rational(p, q);
}

}  // namespace latmap
