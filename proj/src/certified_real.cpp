#include "gftc/certified_real.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace gftc
{

namespace
{

thread_local mpfr_prec_t current_precision = default_precision_bits;

struct Scratch {
    mpfr_t v;
    explicit Scratch(mpfr_prec_t p) { mpfr_init2(v, p); }
    ~Scratch() { mpfr_clear(v); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
};

void set_rational(mpfr_ptr out, const Rational& q, mpfr_rnd_t rnd)
{
    mpfr_set_q(out, q.get_mpq_t(), rnd);
}

std::string format_mpfr(mpfr_srcptr x, int digits, bool up)
{
    char* buf = nullptr;
    const int n = up ? mpfr_asprintf(&buf, "%.*RUe", digits - 1, x)
                     : mpfr_asprintf(&buf, "%.*RDe", digits - 1, x);
    if (n < 0 || buf == nullptr) {
        throw std::runtime_error("mpfr_asprintf failed");
    }
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

} // namespace

mpfr_prec_t working_precision()
{
    return current_precision;
}

PrecisionScope::PrecisionScope(mpfr_prec_t bits) : saved_(current_precision)
{
    current_precision = std::clamp<mpfr_prec_t>(bits, 32, 65536);
}

PrecisionScope::~PrecisionScope()
{
    current_precision = saved_;
}

CertifiedReal::CertifiedReal()
{
    mpfr_init2(lo_, current_precision);
    mpfr_init2(hi_, current_precision);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
}

CertifiedReal::CertifiedReal(const Rational& q)
{
    mpfr_init2(lo_, current_precision);
    mpfr_init2(hi_, current_precision);
    set_rational(lo_, q, MPFR_RNDD);
    set_rational(hi_, q, MPFR_RNDU);
}

CertifiedReal::CertifiedReal(long v)
{
    mpfr_init2(lo_, current_precision);
    mpfr_init2(hi_, current_precision);
    mpfr_set_si(lo_, v, MPFR_RNDD);
    mpfr_set_si(hi_, v, MPFR_RNDU);
}

CertifiedReal::CertifiedReal(const CertifiedReal& other)
{
    mpfr_init2(lo_, mpfr_get_prec(other.lo_));
    mpfr_init2(hi_, mpfr_get_prec(other.hi_));
    mpfr_set(lo_, other.lo_, MPFR_RNDD);
    mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

CertifiedReal::CertifiedReal(CertifiedReal&& other) noexcept
{
    // Leave `other` valid (zero at minimal precision) so its destructor works.
    mpfr_init2(lo_, MPFR_PREC_MIN);
    mpfr_init2(hi_, MPFR_PREC_MIN);
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
}

CertifiedReal& CertifiedReal::operator=(const CertifiedReal& other)
{
    if (this != &other) {
        mpfr_set_prec(lo_, mpfr_get_prec(other.lo_));
        mpfr_set_prec(hi_, mpfr_get_prec(other.hi_));
        mpfr_set(lo_, other.lo_, MPFR_RNDD);
        mpfr_set(hi_, other.hi_, MPFR_RNDU);
    }
    return *this;
}

CertifiedReal& CertifiedReal::operator=(CertifiedReal&& other) noexcept
{
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
    return *this;
}

CertifiedReal::~CertifiedReal()
{
    mpfr_clear(lo_);
    mpfr_clear(hi_);
}

CertifiedReal CertifiedReal::from_bounds(mpfr_srcptr lo, mpfr_srcptr hi)
{
    if (mpfr_nan_p(lo) || mpfr_nan_p(hi) || mpfr_greater_p(lo, hi)) {
        throw std::invalid_argument("CertifiedReal: invalid bounds");
    }
    CertifiedReal r;
    mpfr_set(r.lo_, lo, MPFR_RNDD);
    mpfr_set(r.hi_, hi, MPFR_RNDU);
    return r;
}

CertifiedReal CertifiedReal::from_long_double(long double v)
{
    CertifiedReal r;
    mpfr_set_ld(r.lo_, v, MPFR_RNDD);
    mpfr_set_ld(r.hi_, v, MPFR_RNDU);
    return r;
}

CertifiedReal CertifiedReal::hull(const CertifiedReal& a, const CertifiedReal& b)
{
    CertifiedReal r;
    mpfr_min(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
}

long double CertifiedReal::mid_ld() const
{
    Scratch m(mpfr_get_prec(lo_) + 2);
    mpfr_add(m.v, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(m.v, m.v, 1, MPFR_RNDN);
    return mpfr_get_ld(m.v, MPFR_RNDN);
}

long double CertifiedReal::width_ld() const
{
    Scratch w(mpfr_get_prec(lo_));
    mpfr_sub(w.v, hi_, lo_, MPFR_RNDU);
    return mpfr_get_ld(w.v, MPFR_RNDU);
}

long double CertifiedReal::lo_ld() const
{
    return mpfr_get_ld(lo_, MPFR_RNDD);
}

long double CertifiedReal::hi_ld() const
{
    return mpfr_get_ld(hi_, MPFR_RNDU);
}

CertifiedReal CertifiedReal::midpoint() const
{
    CertifiedReal r;
    mpfr_add(r.lo_, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(r.lo_, r.lo_, 1, MPFR_RNDN);
    mpfr_set(r.hi_, r.lo_, MPFR_RNDN);
    return r;
}

bool CertifiedReal::is_point() const
{
    return mpfr_equal_p(lo_, hi_) != 0;
}

bool CertifiedReal::contains(const Rational& q) const
{
    return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
}

bool CertifiedReal::contains(const CertifiedReal& inner) const
{
    return mpfr_lessequal_p(lo_, inner.lo_) && mpfr_lessequal_p(inner.hi_, hi_);
}

bool CertifiedReal::positive() const
{
    return mpfr_sgn(lo_) > 0;
}

bool CertifiedReal::negative() const
{
    return mpfr_sgn(hi_) < 0;
}

std::string CertifiedReal::lo_string(int digits) const
{
    return format_mpfr(lo_, digits, false);
}

std::string CertifiedReal::hi_string(int digits) const
{
    return format_mpfr(hi_, digits, true);
}

CertifiedReal CertifiedReal::operator-() const
{
    CertifiedReal r;
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
}

CertifiedReal& CertifiedReal::operator+=(const CertifiedReal& b)
{
    mpfr_prec_round(lo_, std::max(mpfr_get_prec(lo_), current_precision), MPFR_RNDD);
    mpfr_prec_round(hi_, std::max(mpfr_get_prec(hi_), current_precision), MPFR_RNDU);
    mpfr_add(lo_, lo_, b.lo_, MPFR_RNDD);
    mpfr_add(hi_, hi_, b.hi_, MPFR_RNDU);
    return *this;
}

CertifiedReal& CertifiedReal::operator-=(const CertifiedReal& b)
{
    CertifiedReal r;
    mpfr_sub(r.lo_, lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, hi_, b.lo_, MPFR_RNDU);
    *this = std::move(r);
    return *this;
}

CertifiedReal& CertifiedReal::operator*=(const CertifiedReal& b)
{
    CertifiedReal r;
    const mpfr_prec_t p = current_precision;
    Scratch t(p);
    mpfr_srcptr xs[2] = {lo_, hi_};
    mpfr_srcptr ys[2] = {b.lo_, b.hi_};
    bool first = true;
    for (auto x : xs) {
        for (auto y : ys) {
            mpfr_mul(t.v, x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t.v, r.lo_)) {
                mpfr_set(r.lo_, t.v, MPFR_RNDD);
            }
            mpfr_mul(t.v, x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t.v, r.hi_)) {
                mpfr_set(r.hi_, t.v, MPFR_RNDU);
            }
            first = false;
        }
    }
    *this = std::move(r);
    return *this;
}

CertifiedReal& CertifiedReal::operator/=(const CertifiedReal& b)
{
    if (mpfr_sgn(b.lo_) <= 0 && mpfr_sgn(b.hi_) >= 0) {
        throw UndecidableComparison("division by an enclosure containing zero");
    }
    CertifiedReal r;
    const mpfr_prec_t p = current_precision;
    Scratch t(p);
    mpfr_srcptr xs[2] = {lo_, hi_};
    mpfr_srcptr ys[2] = {b.lo_, b.hi_};
    bool first = true;
    for (auto x : xs) {
        for (auto y : ys) {
            mpfr_div(t.v, x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t.v, r.lo_)) {
                mpfr_set(r.lo_, t.v, MPFR_RNDD);
            }
            mpfr_div(t.v, x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t.v, r.hi_)) {
                mpfr_set(r.hi_, t.v, MPFR_RNDU);
            }
            first = false;
        }
    }
    *this = std::move(r);
    return *this;
}

CertifiedReal operator+(CertifiedReal a, const CertifiedReal& b)
{
    a += b;
    return a;
}

CertifiedReal operator-(CertifiedReal a, const CertifiedReal& b)
{
    a -= b;
    return a;
}

CertifiedReal operator*(CertifiedReal a, const CertifiedReal& b)
{
    a *= b;
    return a;
}

CertifiedReal operator/(CertifiedReal a, const CertifiedReal& b)
{
    a /= b;
    return a;
}

CertifiedReal exp(const CertifiedReal& x)
{
    Scratch lo(current_precision);
    Scratch hi(current_precision);
    mpfr_exp(lo.v, x.lo(), MPFR_RNDD);
    mpfr_exp(hi.v, x.hi(), MPFR_RNDU);
    return CertifiedReal::from_bounds(lo.v, hi.v);
}

CertifiedReal log(const CertifiedReal& x)
{
    if (mpfr_sgn(x.hi()) <= 0) {
        throw std::domain_error("log of a non-positive value");
    }
    if (mpfr_sgn(x.lo()) <= 0) {
        throw UndecidableComparison("log of an enclosure touching zero");
    }
    Scratch lo(current_precision);
    Scratch hi(current_precision);
    mpfr_log(lo.v, x.lo(), MPFR_RNDD);
    mpfr_log(hi.v, x.hi(), MPFR_RNDU);
    return CertifiedReal::from_bounds(lo.v, hi.v);
}

CertifiedReal sqrt(const CertifiedReal& x)
{
    if (mpfr_sgn(x.hi()) < 0) {
        throw std::domain_error("sqrt of a negative value");
    }
    Scratch lo(current_precision);
    Scratch hi(current_precision);
    if (mpfr_sgn(x.lo()) <= 0) {
        mpfr_set_zero(lo.v, 1);
    } else {
        mpfr_sqrt(lo.v, x.lo(), MPFR_RNDD);
    }
    mpfr_sqrt(hi.v, x.hi(), MPFR_RNDU);
    return CertifiedReal::from_bounds(lo.v, hi.v);
}

CertifiedReal pow_certified(const Rational& base, const CertifiedReal& exponent)
{
    if (base <= 0) {
        throw std::domain_error("pow_certified: base must be positive");
    }
    if (base == 1) {
        return CertifiedReal(1L);
    }
    if (exponent.is_point() && mpfr_integer_p(exponent.lo()) && mpfr_fits_slong_p(exponent.lo(), MPFR_RNDN)) {
        const long n = mpfr_get_si(exponent.lo(), MPFR_RNDN);
        return CertifiedReal(pow(base, n));
    }
    return pow_certified(CertifiedReal(base), exponent);
}

CertifiedReal pow_certified(const CertifiedReal& base, const CertifiedReal& exponent)
{
    if (mpfr_sgn(base.hi()) <= 0) {
        throw std::domain_error("pow_certified: base must be positive");
    }
    return exp(exponent * log(base));
}

CertifiedReal min(const CertifiedReal& a, const CertifiedReal& b)
{
    Scratch lo(current_precision);
    Scratch hi(current_precision);
    mpfr_min(lo.v, a.lo(), b.lo(), MPFR_RNDD);
    mpfr_min(hi.v, a.hi(), b.hi(), MPFR_RNDU);
    return CertifiedReal::from_bounds(lo.v, hi.v);
}

CertifiedReal max(const CertifiedReal& a, const CertifiedReal& b)
{
    Scratch lo(current_precision);
    Scratch hi(current_precision);
    mpfr_max(lo.v, a.lo(), b.lo(), MPFR_RNDD);
    mpfr_max(hi.v, a.hi(), b.hi(), MPFR_RNDU);
    return CertifiedReal::from_bounds(lo.v, hi.v);
}

Ordering compare(const CertifiedReal& a, const CertifiedReal& b)
{
    if (mpfr_less_p(a.hi(), b.lo())) {
        return Ordering::Less;
    }
    if (mpfr_greater_p(a.lo(), b.hi())) {
        return Ordering::Greater;
    }
    return Ordering::Unordered;
}

bool definitely_less(const CertifiedReal& a, const CertifiedReal& b)
{
    return compare(a, b) == Ordering::Less;
}

bool less_or_throw(const CertifiedReal& a, const CertifiedReal& b)
{
    switch (compare(a, b)) {
    case Ordering::Less:
        return true;
    case Ordering::Greater:
        return false;
    default:
        throw UndecidableComparison("overlapping enclosures in a strict comparison");
    }
}

CertifiedReal solve_monotone_root(const MonotoneFunction& f, double lo, double hi, double tol, int max_iterations)
{
    if (!(lo < hi)) {
        throw std::invalid_argument("solve_monotone_root: empty bracket");
    }
    const CertifiedReal zero(0L);
    CertifiedReal a = CertifiedReal::from_long_double(lo);
    CertifiedReal b = CertifiedReal::from_long_double(hi);

    const Ordering fa = compare(f(a), zero);
    const Ordering fb = compare(f(b), zero);
    if (fa == Ordering::Less || fb == Ordering::Greater) {
        throw NoSignChange("no sign change on the bracket");
    }
    if (fa == Ordering::Unordered || fb == Ordering::Unordered) {
        throw UndecidableComparison("sign of f at a bracket endpoint is not resolved");
    }

    auto width = [&]() { return (b - a).hi_ld(); };
    int iter = 0;
    while (width() > tol) {
        if (++iter > max_iterations) {
            throw RootNotConverged("root finder hit its iteration cap", CertifiedReal::hull(a, b));
        }
        bool moved = false;
        // Try the midpoint first, then two off-centre points if the sign at
        // the midpoint is not resolved.
        for (const long num : {4L, 3L, 5L}) {
            CertifiedReal t = (a + (b - a) * (CertifiedReal(num) / CertifiedReal(8L))).midpoint();
            const Ordering s = compare(f(t), zero);
            if (s == Ordering::Greater) {
                a = t;
                moved = true;
                break;
            }
            if (s == Ordering::Less) {
                b = t;
                moved = true;
                break;
            }
        }
        if (!moved) {
            throw UndecidableComparison("root bracket cannot be narrowed at this precision");
        }
    }
    return CertifiedReal::hull(a, b);
}

} // namespace gftc
