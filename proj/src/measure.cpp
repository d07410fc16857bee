#include "gftc/measure.hpp"

#include <algorithm>
#include <cmath>

namespace gftc
{

namespace
{

using PointVector = std::vector<CertifiedReal>;

// Gaussian elimination with partial pivoting on midpoints. Approximate.
PointVector solve_point(std::vector<PointVector> m, PointVector rhs)
{
    const std::size_t n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(m[r][c].mid_ld()) > std::fabs(m[piv][c].mid_ld())) {
                piv = r;
            }
        }
        std::swap(m[c], m[piv]);
        std::swap(rhs[c], rhs[piv]);
        if (m[c][c].mid_ld() == 0) {
            continue;
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const CertifiedReal f = (m[r][c] / m[c][c]).midpoint();
            for (std::size_t k = c; k < n; ++k) {
                m[r][k] = (m[r][k] - f * m[c][k]).midpoint();
            }
            rhs[r] = (rhs[r] - f * rhs[c]).midpoint();
        }
    }
    PointVector x(n, CertifiedReal(0L));
    for (std::size_t i = n; i-- > 0;) {
        CertifiedReal s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s = (s - m[i][k] * x[k]).midpoint();
        }
        if (m[i][i].mid_ld() == 0) {
            x[i] = CertifiedReal(1L);
        } else {
            x[i] = (s / m[i][i]).midpoint();
        }
    }
    return x;
}

PointVector normalize(PointVector v)
{
    long double mx = 0;
    for (const auto& x : v) {
        mx = std::max(mx, std::fabs(x.mid_ld()));
    }
    if (mx == 0) {
        return v;
    }
    const CertifiedReal s = CertifiedReal::from_long_double(mx);
    for (auto& x : v) {
        x = (x / s).midpoint();
    }
    return v;
}

PointVector multiply(const IntervalMatrix& a, const PointVector& v)
{
    PointVector out(v.size(), CertifiedReal(0L));
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            out[i] += a[i][j] * v[j];
        }
    }
    return out;
}

// Approximate Perron vector (strictly positive entries).
PointVector perron_guess(const IntervalMatrix& a)
{
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m[i][j] = a[i][j].mid_ld();
        }
    }
    // power iteration on (A + I) which is primitive when A is irreducible
    std::vector<long double> v(n, 1.0L), w(n);
    long double r = 0;
    for (int it = 0; it < 5000; ++it) {
        long double mx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            long double s = v[i];
            for (std::size_t j = 0; j < n; ++j) {
                s += m[i][j] * v[j];
            }
            w[i] = s;
            mx = std::max(mx, s);
        }
        long double diff = 0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] /= mx;
            diff = std::max(diff, std::fabs(w[i] - v[i]));
        }
        v.swap(w);
        r = mx - 1;
        if (diff < 1e-17L && it > 10) {
            break;
        }
    }
    PointVector pv;
    pv.reserve(n);
    for (const auto x : v) {
        pv.push_back(CertifiedReal::from_long_double(x));
    }
    // inverse iteration with a shift just above r
    const CertifiedReal mu = CertifiedReal::from_long_double(r * (1 + 1e-14L) + 1e-30L);
    const long double target = std::ldexp(1.0L, -static_cast<int>(working_precision()) + 24);
    for (int step = 0; step < 12; ++step) {
        std::vector<PointVector> shifted(n, PointVector(n, CertifiedReal(0L)));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                shifted[i][j] = (i == j ? a[i][j] - mu : a[i][j]).midpoint();
            }
        }
        PointVector next = normalize(solve_point(shifted, pv));
        for (auto& x : next) {
            if (x.mid_ld() < 0) {
                x = -x;
            }
        }
        long double diff = 0;
        for (std::size_t i = 0; i < n; ++i) {
            diff = std::max(diff, std::fabs((next[i] - pv[i]).mid_ld()));
        }
        pv = std::move(next);
        if (diff < target) {
            break;
        }
    }
    return pv;
}

} // namespace

IntervalMatrix evaluate_template(const IncidenceTemplate& tmpl, const CertifiedReal& s)
{
    IntervalMatrix a(tmpl.q, std::vector<CertifiedReal>(tmpl.q, CertifiedReal(0L)));
    for (std::size_t i = 0; i < tmpl.q; ++i) {
        for (std::size_t j = 0; j < tmpl.q; ++j) {
            for (const auto& r : tmpl.entries[i][j]) {
                a[i][j] += pow_certified(r, s);
            }
        }
    }
    return a;
}

CertifiedReal spectral_radius(const IntervalMatrix& a)
{
    const PointVector v = perron_guess(a);
    const PointVector av = multiply(a, v);
    CertifiedReal lo, hi;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].positive()) {
            throw UndecidableComparison("approximate Perron vector is not positive");
        }
        const CertifiedReal ratio = av[i] / v[i];
        if (i == 0) {
            lo = ratio;
            hi = ratio;
        } else {
            lo = min(lo, ratio);
            hi = max(hi, ratio);
        }
    }
    return CertifiedReal::hull(lo, hi);
}

bool full_dimension(const IncidenceTemplate& tmpl)
{
    for (std::size_t i = 0; i < tmpl.q; ++i) {
        Rational sum = 0;
        for (const auto& row : tmpl.entries[i]) {
            for (const auto& r : row) {
                sum += r;
            }
        }
        if (sum != 1) {
            return false;
        }
    }
    return true;
}

CertifiedReal solve_dimension(const IncidenceTemplate& tmpl)
{
    if (!check_irreducible(tmpl)) {
        throw NotIrreducible("incidence matrix is not irreducible");
    }
    if (full_dimension(tmpl)) {
        return CertifiedReal(1L);
    }
    const double tol = std::ldexp(1.0, -static_cast<int>(working_precision() / 2));
    auto f = [&](const CertifiedReal& s) { return spectral_radius(evaluate_template(tmpl, s)) - CertifiedReal(1L); };
    const CertifiedReal at_zero = f(CertifiedReal(0L));
    if (!at_zero.positive()) {
        throw std::logic_error("spectral radius of A_0 is not above 1");
    }
    return solve_monotone_root(f, 0.0, 1.0, tol);
}

std::vector<CertifiedReal> principal_vector(const IncidenceTemplate& tmpl, const CertifiedReal& alpha)
{
    const std::size_t q = tmpl.q;
    if (q == 1) {
        return {CertifiedReal(1L)};
    }
    CertifiedReal a_lo_exp, a_hi_exp;
    {
        CertifiedReal lo_pt = CertifiedReal::from_bounds(alpha.lo(), alpha.lo());
        CertifiedReal hi_pt = CertifiedReal::from_bounds(alpha.hi(), alpha.hi());
        a_lo_exp = std::move(hi_pt); // entries are decreasing in the exponent
        a_hi_exp = std::move(lo_pt);
    }
    const IntervalMatrix small = evaluate_template(tmpl, a_lo_exp);
    const IntervalMatrix large = evaluate_template(tmpl, a_hi_exp);
    const IntervalMatrix mid = evaluate_template(tmpl, alpha.midpoint());

    // a_1 = 1 and (I - A') a' = A(2..q, 1)
    const std::size_t n = q - 1;
    std::vector<PointVector> sys(n, PointVector(n, CertifiedReal(0L)));
    PointVector rhs(n, CertifiedReal(0L));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            sys[i][j] = ((i == j ? CertifiedReal(1L) : CertifiedReal(0L)) - mid[i + 1][j + 1]).midpoint();
        }
        rhs[i] = mid[i + 1][0].midpoint();
    }
    PointVector x = solve_point(sys, rhs);
    for (int round = 0; round < 3; ++round) {
        // iterative refinement
        PointVector res(n, CertifiedReal(0L));
        for (std::size_t i = 0; i < n; ++i) {
            CertifiedReal s = rhs[i];
            for (std::size_t j = 0; j < n; ++j) {
                s -= sys[i][j] * x[j];
            }
            res[i] = s.midpoint();
        }
        const PointVector dx = solve_point(sys, res);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = (x[i] + dx[i]).midpoint();
        }
    }

    auto apply = [&](const IntervalMatrix& a, const PointVector& v) {
        PointVector out(n, CertifiedReal(0L));
        for (std::size_t i = 0; i < n; ++i) {
            CertifiedReal s = a[i + 1][0];
            for (std::size_t j = 0; j < n; ++j) {
                s += a[i + 1][j + 1] * v[j];
            }
            out[i] = s;
        }
        return out;
    };

    long double eps = std::max(alpha.width_ld() * 4, std::ldexp(1.0L, -static_cast<int>(working_precision()) + 40));
    for (int attempt = 0; attempt < 120; ++attempt, eps *= 2) {
        const CertifiedReal down = CertifiedReal(1L) - CertifiedReal::from_long_double(eps);
        const CertifiedReal up = CertifiedReal(1L) + CertifiedReal::from_long_double(eps);
        PointVector xl(n, CertifiedReal(0L)), xu(n, CertifiedReal(0L));
        for (std::size_t i = 0; i < n; ++i) {
            xl[i] = CertifiedReal::from_bounds((x[i] * down).lo(), (x[i] * down).lo());
            xu[i] = CertifiedReal::from_bounds((x[i] * up).hi(), (x[i] * up).hi());
        }
        const PointVector tl = apply(small, xl);
        const PointVector tu = apply(large, xu);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            ok = mpfr_greaterequal_p(tl[i].lo(), xl[i].hi()) && mpfr_lessequal_p(tu[i].hi(), xu[i].lo());
        }
        if (ok) {
            std::vector<CertifiedReal> out{CertifiedReal(1L)};
            for (std::size_t i = 0; i < n; ++i) {
                out.push_back(CertifiedReal::from_bounds(xl[i].lo(), xu[i].hi()));
            }
            return out;
        }
    }
    throw UndecidableComparison("Perron vector enclosure could not be certified");
}

CertifiedReal MeasureModel::power(const Rational& length) const
{
    return pow_certified(length, alpha);
}

CertifiedReal MeasureModel::island_measure(const Rational& length, int type) const
{
    return power(length) * perron.at(static_cast<std::size_t>(type));
}

MeasureModel build_measure(const TypeTable& table)
{
    MeasureModel model;
    model.tmpl = incidence_template(table);
    model.alpha = solve_dimension(model.tmpl);
    model.full = full_dimension(model.tmpl);
    if (model.full) {
        model.perron.assign(model.tmpl.q, CertifiedReal(1L));
    } else {
        model.perron = principal_vector(model.tmpl, model.alpha);
    }
    return model;
}

CertifiedReal island_measure(const MeasureModel& model, const Island& island)
{
    if (island.type_id < 0) {
        throw std::invalid_argument("island has no type");
    }
    return model.island_measure(island.length(), island.type_id);
}

MeasuredFrame measured_frame(const TypeTable& table, const MeasureModel& model, int k, std::size_t cap)
{
    MeasuredFrame f;
    f.k = k;
    f.islands = expand_frame(table, k, cap);
    f.prefix.reserve(f.islands.size() + 1);
    f.prefix.emplace_back(0L);
    for (const auto& i : f.islands) {
        f.prefix.push_back(f.prefix.back() + model.island_measure(i.length, i.type));
    }
    return f;
}

namespace
{

// prefix index of a field point: islands strictly left of x
std::size_t field_index(const MeasuredFrame& f, const Rational& x)
{
    auto it = std::upper_bound(f.islands.begin(), f.islands.end(), x,
                               [](const Rational& v, const TypedIsland& t) { return v < t.left; });
    if (it != f.islands.begin()) {
        const auto& prev = *(it - 1);
        const std::size_t i = static_cast<std::size_t>(it - f.islands.begin()) - 1;
        if (prev.left == x) {
            return i;
        }
        if (prev.right() == x) {
            return i + 1;
        }
    }
    throw std::invalid_argument("not an island endpoint of generation " + std::to_string(f.k) + ": " +
                                format_rational(x));
}

} // namespace

CertifiedReal interval_measure(const MeasuredFrame& frame, const Rational& x, const Rational& y)
{
    if (!(x < y)) {
        throw std::invalid_argument("interval_measure needs x < y");
    }
    return frame.prefix[field_index(frame, y)] - frame.prefix[field_index(frame, x)];
}

} // namespace gftc
