#pragma once

// Exact rational scalar type. The whole library is written against this one
// alias so the coefficient field can be swapped (e.g. for a finite extension)
// without touching the algebra code.

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phigamma {

using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  if (den == 0) throw std::domain_error("rat: zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

// "5", "-3/4", "0", "7/2"
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("parse_rational: empty string");
  Rational r;
  if (r.set_str(s, 10) != 0)
    throw std::invalid_argument("parse_rational: bad literal '" + s + "'");
  if (r.get_den() == 0)
    throw std::invalid_argument("parse_rational: zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

inline Rational rpow(Rational base, long e) {
  if (e < 0) {
    if (base == 0) throw std::domain_error("rpow: 0 to a negative power");
    base = Rational(1) / base;
    e = -e;
  }
  Rational acc(1);
  while (e) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

inline Rational factorial(unsigned long n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return Rational(f);
}

// Generalized binomial coefficient: a(a-1)...(a-k+1)/k! for rational a.
inline Rational binom(const Rational& a, unsigned long k) {
  Rational num(1);
  for (unsigned long i = 0; i < k; ++i) num *= a - Rational(static_cast<long>(i));
  return num / factorial(k);
}

}  // namespace phigamma
