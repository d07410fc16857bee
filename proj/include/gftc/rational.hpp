#ifndef GFTC_RATIONAL_HPP
#define GFTC_RATIONAL_HPP

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace gftc
{

// Exact rational number. mpq_class keeps numerator/denominator in lowest terms
// with a positive denominator as long as values are built through the helpers
// below (or through arithmetic, which canonicalizes).
using Rational = mpq_class;
using BigInt = mpz_class;

// Parses "p/q", "p" or a plain decimal such as "0.375". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// "p/q", or "p" when the denominator is 1.
std::string format_rational(const Rational& q);

Rational make_rational(long num, long den = 1);

// Integer power, exponent may be negative (base must then be nonzero).
Rational pow(const Rational& base, long exponent);

long double to_long_double(const Rational& q);

inline Rational abs(const Rational& q)
{
    return q < 0 ? Rational(-q) : q;
}

inline Rational min(const Rational& a, const Rational& b)
{
    return b < a ? b : a;
}

inline Rational max(const Rational& a, const Rational& b)
{
    return a < b ? b : a;
}

} // namespace gftc

#endif
