#ifndef GFTC_CERTIFIED_REAL_HPP
#define GFTC_CERTIFIED_REAL_HPP

#include "gftc/rational.hpp"

#include <mpfr.h>

#include <functional>
#include <stdexcept>
#include <string>

namespace gftc
{

// Thrown when two enclosures overlap and the caller needs a strict answer.
// The pipeline catches it and reruns with a doubled working precision.
class UndecidableComparison : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

constexpr mpfr_prec_t default_precision_bits = 128;
constexpr mpfr_prec_t max_precision_bits = 1024;

mpfr_prec_t working_precision();

// RAII guard; new values are created at the innermost scope's precision.
class PrecisionScope
{
public:
    explicit PrecisionScope(mpfr_prec_t bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    mpfr_prec_t saved_;
};

// Closed interval [lo, hi] with MPFR endpoints. Every operation rounds the
// lower endpoint toward -inf and the upper endpoint toward +inf.
class CertifiedReal
{
public:
    CertifiedReal();
    explicit CertifiedReal(const Rational& q);
    explicit CertifiedReal(long v);
    CertifiedReal(const CertifiedReal& other);
    CertifiedReal(CertifiedReal&& other) noexcept;
    CertifiedReal& operator=(const CertifiedReal& other);
    CertifiedReal& operator=(CertifiedReal&& other) noexcept;
    ~CertifiedReal();

    static CertifiedReal from_bounds(mpfr_srcptr lo, mpfr_srcptr hi);
    static CertifiedReal from_long_double(long double v);
    static CertifiedReal hull(const CertifiedReal& a, const CertifiedReal& b);

    mpfr_srcptr lo() const { return lo_; }
    mpfr_srcptr hi() const { return hi_; }
    mpfr_prec_t precision() const { return mpfr_get_prec(lo_); }

    long double mid_ld() const;
    long double width_ld() const;
    long double lo_ld() const;
    long double hi_ld() const;
    // Point interval at the (rounded) midpoint. Not an enclosure of anything;
    // used to seed approximate iterations.
    CertifiedReal midpoint() const;

    bool is_point() const;
    bool contains(const Rational& q) const;
    bool contains(const CertifiedReal& inner) const;
    bool positive() const;
    bool negative() const;

    // Decimal strings rounded outward, `digits` significant digits.
    std::string lo_string(int digits = 30) const;
    std::string hi_string(int digits = 30) const;

    CertifiedReal operator-() const;
    CertifiedReal& operator+=(const CertifiedReal& b);
    CertifiedReal& operator-=(const CertifiedReal& b);
    CertifiedReal& operator*=(const CertifiedReal& b);
    CertifiedReal& operator/=(const CertifiedReal& b);

private:
    mpfr_t lo_;
    mpfr_t hi_;
};

CertifiedReal operator+(CertifiedReal a, const CertifiedReal& b);
CertifiedReal operator-(CertifiedReal a, const CertifiedReal& b);
CertifiedReal operator*(CertifiedReal a, const CertifiedReal& b);
CertifiedReal operator/(CertifiedReal a, const CertifiedReal& b);

CertifiedReal exp(const CertifiedReal& x);
CertifiedReal log(const CertifiedReal& x);
CertifiedReal sqrt(const CertifiedReal& x);
CertifiedReal pow_certified(const Rational& base, const CertifiedReal& exponent);
CertifiedReal pow_certified(const CertifiedReal& base, const CertifiedReal& exponent);
CertifiedReal min(const CertifiedReal& a, const CertifiedReal& b);
CertifiedReal max(const CertifiedReal& a, const CertifiedReal& b);

enum class Ordering
{
    Less,
    Greater,
    Unordered
};

Ordering compare(const CertifiedReal& a, const CertifiedReal& b);
// Strict comparisons; throw UndecidableComparison when the enclosures overlap.
bool definitely_less(const CertifiedReal& a, const CertifiedReal& b);
bool less_or_throw(const CertifiedReal& a, const CertifiedReal& b);

class NoSignChange : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class RootNotConverged : public std::runtime_error
{
public:
    RootNotConverged(const std::string& what, CertifiedReal best)
        : std::runtime_error(what), best_(std::move(best))
    {
    }
    const CertifiedReal& best() const { return best_; }

private:
    CertifiedReal best_;
};

using MonotoneFunction = std::function<CertifiedReal(const CertifiedReal&)>;

// f strictly decreasing on [lo, hi] with f(lo) > 0 > f(hi). Returns an
// interval of width <= tol that contains the root.
CertifiedReal solve_monotone_root(const MonotoneFunction& f, double lo, double hi, double tol,
                                  int max_iterations = 4000);

} // namespace gftc

#endif
