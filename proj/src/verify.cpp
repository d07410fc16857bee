#include "gftc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace gftc
{

const char* to_string(BVerdict v)
{
    switch (v) {
    case BVerdict::VerifiedToDepth:
        return "verified_to_depth";
    case BVerdict::ViolationFound:
        return "violation_found";
    case BVerdict::Inconclusive:
        break;
    }
    return "inconclusive";
}

AStatus check_assumption_a(const TypeTable& table, const IFSSpec& spec)
{
    (void)spec;
    AStatus out;
    for (const auto& st : table.states) {
        const auto& v = st.representative.vertices;
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                const bool j_in_i = v[i].left() <= v[j].left() && v[j].right() <= v[i].right();
                const bool i_in_j = v[j].left() <= v[i].left() && v[i].right() <= v[j].right();
                if (j_in_i || i_in_j) {
                    out.holds = false;
                    out.island = st.representative;
                    out.outer = j_in_i ? v[i] : v[j];
                    out.inner = j_in_i ? v[j] : v[i];
                    return out;
                }
            }
        }
    }
    return out;
}

namespace
{

using Span = std::pair<Rational, Rational>;

// total length of (a cap [lo, hi]) minus the union of b; both sorted, disjoint interiors
Rational residual_length(const std::vector<Span>& a, const std::vector<Span>& b, const Rational& lo,
                         const Rational& hi)
{
    Rational total = 0;
    std::size_t j = 0;
    for (const auto& s : a) {
        Rational x = max(s.first, lo);
        const Rational y = min(s.second, hi);
        if (!(x < y)) {
            continue;
        }
        while (j < b.size() && b[j].second <= x) {
            ++j;
        }
        std::size_t t = j;
        while (x < y) {
            if (t >= b.size() || b[t].first >= y) {
                total += y - x;
                break;
            }
            if (b[t].first > x) {
                total += b[t].first - x;
            }
            x = max(x, b[t].second);
            ++t;
        }
    }
    return total;
}

std::vector<Span> island_spans(const GenerationFrame& f)
{
    std::vector<Span> out;
    out.reserve(f.islands.size());
    for (const auto& i : f.islands) {
        out.emplace_back(i.left, i.right);
    }
    return out;
}

std::vector<Span> image_spans(const AffineMap& s, const std::vector<Span>& spans)
{
    std::vector<Span> out;
    out.reserve(spans.size());
    for (const auto& p : spans) {
        out.emplace_back(s.apply(p.first), s.apply(p.second));
    }
    return out;
}

} // namespace

BStatus check_assumption_b(const IFSSpec& spec, const TypeTable& table, int depth, std::size_t cap)
{
    BStatus out;
    const AffineMap& s1 = spec.first();
    const AffineMap& sm = spec.last();
    const int m = static_cast<int>(spec.size());

    // first-level images of the other maps miss the open edge images
    bool clean1 = true;
    bool cleanm = true;
    for (int j = 1; j < m; ++j) {
        if (spec.maps[j].left() < s1.right()) {
            clean1 = false;
        }
    }
    for (int j = 0; j + 1 < m; ++j) {
        if (spec.maps[j].right() > sm.left()) {
            cleanm = false;
        }
    }
    if (clean1 && cleanm) {
        out.verdict = BVerdict::VerifiedToDepth;
        out.depth = 1;
        out.residual = 0;
        out.residuals.push_back(0);
        return out;
    }

    const Rational eps = pow(Rational(2), -64);
    std::set<Rational> seen1, seenm;
    auto outside_k = [&](const Rational& y) { return dist_to_attractor(table, y, eps).positive(); };

    GenerationFrame prev = build_frame(spec, 0, cap);
    std::vector<Span> prev_spans = island_spans(prev);
    bool decreasing = true;
    std::size_t last_count = 1;
    std::size_t prev_count = 1;
    for (int k = 1; k <= depth; ++k) {
        if (!out.residuals.empty() && last_count * last_count > cap * prev_count) {
            out.budget_limited = true;
            break;
        }
        GenerationFrame f;
        try {
            f = build_frame(spec, k, cap);
        } catch (const FrameTooLarge&) {
            out.budget_limited = true;
            break;
        }
        prev_count = std::max<std::size_t>(last_count, 1);
        last_count = f.vertices.size();
        // violation search over vertex endpoints; these are points of K.
        // Endpoints of S_1 w (resp. S_m w) images lie in S_1 K already.
        std::vector<Rational> pts1, ptsm;
        for (const auto& v : f.vertices) {
            const bool from1 = !v.word.empty() && v.word.front() == 0;
            const bool fromm = !v.word.empty() && v.word.front() == m - 1;
            if (!from1) {
                pts1.push_back(v.map.left());
                pts1.push_back(v.map.right());
            }
            if (!fromm) {
                ptsm.push_back(v.map.left());
                ptsm.push_back(v.map.right());
            }
        }
        for (auto* pts : {&pts1, &ptsm}) {
            std::sort(pts->begin(), pts->end());
            pts->erase(std::unique(pts->begin(), pts->end()), pts->end());
        }
        if (!clean1) {
            for (const auto& x : pts1) {
                if (!(x > s1.left() && x < s1.right()) || !seen1.insert(x).second) {
                    continue;
                }
                const Rational y = s1.inverse().apply(x);
                if (outside_k(y)) {
                    out.verdict = BVerdict::ViolationFound;
                    out.point = x;
                    out.preimage = y;
                    out.edge = 1;
                    out.generation = k;
                    out.depth = k;
                    return out;
                }
            }
        }
        if (!cleanm) {
            for (const auto& x : ptsm) {
                if (!(x > sm.left() && x < sm.right()) || !seenm.insert(x).second) {
                    continue;
                }
                const Rational y = sm.inverse().apply(x);
                if (outside_k(y)) {
                    out.verdict = BVerdict::ViolationFound;
                    out.point = x;
                    out.preimage = y;
                    out.edge = m;
                    out.generation = k;
                    out.depth = k;
                    return out;
                }
            }
        }
        const auto spans = island_spans(f);
        Rational r = 0;
        if (!clean1) {
            r += residual_length(spans, image_spans(s1, prev_spans), s1.left(), s1.right());
        }
        if (!cleanm) {
            r += residual_length(spans, image_spans(sm, prev_spans), sm.left(), sm.right());
        }
        if (!out.residuals.empty() && r != 0 && !(r < out.residuals.back())) {
            decreasing = false;
        }
        out.residuals.push_back(r);
        out.depth = k;
        prev_spans = spans;
    }
    out.residual = out.residuals.empty() ? Rational(1) : out.residuals.back();
    out.verdict = (decreasing && out.depth >= 1) ? BVerdict::VerifiedToDepth : BVerdict::Inconclusive;
    return out;
}

CertifiedReal brute_force_extremum(const TypeTable& table, const MeasureModel& model, int k, Sense sense)
{
    const auto isl = expand_frame(table, k, brute_force_endpoint_limit);
    if (2 * isl.size() > brute_force_endpoint_limit) {
        throw std::length_error("brute force scan limited to " + std::to_string(brute_force_endpoint_limit) +
                                " endpoints");
    }
    const long double alpha = model.alpha.mid_ld();
    std::vector<long double> a;
    for (const auto& p : model.perron) {
        a.push_back(p.mid_ld());
    }
    struct Point {
        Rational x;
        long double xl;
        long double mass; // lambda([0, x])
        std::size_t at;   // islands before x
    };
    std::vector<Point> pts;
    std::vector<CertifiedReal> island_mass;
    long double acc = 0;
    for (const auto& i : isl) {
        pts.push_back({i.left, to_long_double(i.left), acc, island_mass.size()});
        acc += std::pow(to_long_double(i.length), alpha) * a[static_cast<std::size_t>(i.type)];
        island_mass.push_back(model.island_measure(i.length, i.type));
        pts.push_back({i.right(), to_long_double(i.right()), acc, island_mass.size()});
    }
    auto centred = [&](const Rational& mid) {
        auto it = std::upper_bound(isl.begin(), isl.end(), mid,
                                   [](const Rational& v, const TypedIsland& t) { return v < t.left; });
        if (it == isl.begin()) {
            return false;
        }
        --it;
        return mid <= it->right();
    };
    const bool want_max = sense == Sense::Max;
    long double best = want_max ? 0 : std::numeric_limits<long double>::infinity();
    struct Hit {
        std::size_t i, j;
        long double v;
    };
    std::vector<Hit> hits;
    constexpr long double window = 1e-9L;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const long double len = pts[j].xl - pts[i].xl;
            if (!(pts[i].x < pts[j].x)) {
                continue;
            }
            if (!want_max && !centred((pts[i].x + pts[j].x) / 2)) {
                continue;
            }
            const long double v = (pts[j].mass - pts[i].mass) / std::pow(len, alpha);
            if (want_max ? v >= best * (1 - window) : v <= best * (1 + window)) {
                hits.push_back({i, j, v});
                best = want_max ? std::max(best, v) : std::min(best, v);
            }
        }
    }
    std::optional<CertifiedReal> out;
    for (const auto& h : hits) {
        if (want_max ? h.v < best * (1 - window) : h.v > best * (1 + window)) {
            continue;
        }
        // direct sum; differences of long prefix sums are too loose on short intervals
        CertifiedReal num(0L);
        for (std::size_t t = pts[h.i].at; t < pts[h.j].at; ++t) {
            num = num + island_mass[t];
        }
        const CertifiedReal v = num / model.power(pts[h.j].x - pts[h.i].x);
        out = out ? (want_max ? max(*out, v) : min(*out, v)) : v;
    }
    if (!out) {
        throw std::logic_error("no field interval in frame");
    }
    return *out;
}

} // namespace gftc
