#include "gftc/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace gftc
{

namespace
{

bool is_integer_literal(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) {
        return false;
    }
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    return true;
}

BigInt parse_integer(std::string_view s)
{
    if (!is_integer_literal(s)) {
        throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
    }
    if (s[0] == '+') {
        s.remove_prefix(1);
    }
    return BigInt(std::string(s), 10);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    const auto s = trim(text);
    if (s.empty()) {
        throw std::invalid_argument("empty rational");
    }
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const BigInt num = parse_integer(trim(s.substr(0, slash)));
        const BigInt den = parse_integer(trim(s.substr(slash + 1)));
        if (den == 0) {
            throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
        }
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    if (const auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = s.substr(0, dot);
        const std::string_view frac = s.substr(dot + 1);
        bool negative = false;
        if (!int_part.empty() && (int_part[0] == '-' || int_part[0] == '+')) {
            negative = int_part[0] == '-';
            int_part.remove_prefix(1);
        }
        if (int_part.empty() && frac.empty()) {
            throw std::invalid_argument("malformed decimal '" + std::string(s) + "'");
        }
        for (const char c : frac) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                throw std::invalid_argument("malformed decimal '" + std::string(s) + "'");
            }
        }
        const BigInt whole = int_part.empty() ? BigInt(0) : parse_integer(int_part);
        const BigInt digits = frac.empty() ? BigInt(0) : BigInt(std::string(frac), 10);
        BigInt scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        Rational q(whole * scale + digits, scale);
        q.canonicalize();
        return negative ? Rational(-q) : q;
    }
    return Rational(parse_integer(s));
}

std::string format_rational(const Rational& q)
{
    if (q.get_den() == 1) {
        return q.get_num().get_str();
    }
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational make_rational(long num, long den)
{
    if (den == 0) {
        throw std::invalid_argument("zero denominator");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Rational pow(const Rational& base, long exponent)
{
    if (exponent < 0) {
        if (base == 0) {
            throw std::domain_error("zero to a negative power");
        }
        return pow(Rational(1 / base), -exponent);
    }
    BigInt num;
    BigInt den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
    Rational q(num, den);
    q.canonicalize();
    return q;
}

long double to_long_double(const Rational& q)
{
    // mpq_get_d truncates to double; go through a long double quotient of
    // scaled integers so tiny interval lengths keep their full mantissa.
    const auto num_bits = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2));
    const auto den_bits = static_cast<long>(mpz_sizeinbase(q.get_den_mpz_t(), 2));
    BigInt num = q.get_num();
    BigInt den = q.get_den();
    long num_shift = 0;
    long den_shift = 0;
    if (num_bits > 64) {
        num_shift = num_bits - 64;
        num >>= static_cast<mp_bitcnt_t>(num_shift);
    }
    if (den_bits > 64) {
        den_shift = den_bits - 64;
        den >>= static_cast<mp_bitcnt_t>(den_shift);
    }
    auto to_ld = [](const BigInt& z) {
        const bool neg = z < 0;
        BigInt a = neg ? BigInt(-z) : z;
        const auto lo = static_cast<unsigned long>(mpz_get_ui(a.get_mpz_t()));
        a >>= 64;
        const auto hi = static_cast<unsigned long>(mpz_get_ui(a.get_mpz_t()));
        const long double v = std::ldexp(static_cast<long double>(hi), 64) + static_cast<long double>(lo);
        return neg ? -v : v;
    };
    return std::ldexp(to_ld(num) / to_ld(den), static_cast<int>(num_shift - den_shift));
}

} // namespace gftc
