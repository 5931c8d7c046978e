#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace absynth {

using Integer = boost::multiprecision::cpp_int;

/// Exact arbitrary-precision rational. All coefficients and constants in the
/// system live here; fixed-width arithmetic is never used.
using Rational = boost::multiprecision::cpp_rational;

inline Integer rationalNum(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer rationalDen(const Rational& q) { return boost::multiprecision::denominator(q); }

/// Prints `num/den`, or just `num` for integers.
inline std::string toString(const Rational& q) {
  if (rationalDen(q) == 1) return rationalNum(q).str();
  return rationalNum(q).str() + "/" + rationalDen(q).str();
}

/// Parses "n", "-n", "n/d". Throws std::invalid_argument on malformed input.
inline Rational parseRational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(s));
    Integer num(s.substr(0, slash));
    Integer den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("malformed rational literal: " + s);
  }
}

/// Exact conversion of a finite binary64 value.
inline Rational rationalOfDouble(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
  // 53 doublings make the mantissa integral.
  Integer mi(static_cast<std::int64_t>(std::ldexp(m, 53)));
  exp -= 53;
  Rational r(mi);
  if (exp >= 0) {
    r *= Rational(Integer(1) << exp);
  } else {
    r /= Rational(Integer(1) << (-exp));
  }
  return r;
}

/// 2^e as an exact rational (e may be negative).
inline Rational pow2(int e) {
  if (e >= 0) return Rational(Integer(1) << e);
  return Rational(1, Integer(1) << (-e));
}

inline double toDouble(const Rational& q) { return q.convert_to<double>(); }

}  // namespace absynth
