#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

namespace dchaos {

using Rational = mpq_class;
using BigInt = mpz_class;

// Accepts "3", "-2/3", "0.125", "1e-3", "2.5E2". Always exact.
Rational parse_rational(std::string_view text);

// num/den in lowest terms. Two-argument mpq_class constructors skip this.
inline Rational frac(const BigInt& num, const BigInt& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Canonical text: "num/den", or "num" when the denominator is 1.
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

// Exact value of a finite double.
Rational from_double(double v);

Rational pow(const Rational& base, unsigned long exponent);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

// Smallest integer >= q (q must fit in a long).
long ceil_to_long(const Rational& q);

struct RationalHash {
  std::size_t operator()(const Rational& q) const noexcept;
};

struct RationalPairHash {
  std::size_t operator()(const std::pair<Rational, Rational>& xy) const noexcept;
};

}  // namespace dchaos
