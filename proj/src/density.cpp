#include "gftc/density.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace gftc
{

namespace
{

constexpr long double kInf = std::numeric_limits<long double>::infinity();
// relative slack for long double screening; candidates inside it are
// certified with MPFR
constexpr long double kSlack = 1e-9L;

struct Node {
    Rational left;
    Rational len;
    long double lo = 0;     // left, approximate
    long double ln = 1;     // length, approximate
    long double prefix = 0; // lambda([root.left, left])
    long double mass = 1;   // lambda(node)
    int type = 0;
    int depth = 0;
    int anchor = -1; // index of the generation k0+1 ancestor, -1 above it

    long double hi() const { return lo + ln; }
};

// Long double view of the type tree: child weights w = r^alpha a_c / a_t.
class Tree
{
public:
    Tree(const TypeTable& table, const MeasureModel& model) : table_(table)
    {
        alpha_ = model.alpha.mid_ld();
        const std::size_t q = table.q();
        weights_.resize(q);
        offsets_.resize(q);
        ratios_.resize(q);
        for (std::size_t t = 0; t < q; ++t) {
            const long double at = model.perron[t].mid_ld();
            for (const auto& c : table.types[t].children) {
                const long double r = to_long_double(c.ratio);
                weights_[t].push_back(std::pow(r, alpha_) * model.perron[c.type].mid_ld() / at);
                offsets_[t].push_back(to_long_double(c.offset));
                ratios_[t].push_back(r);
            }
        }
        perron_.reserve(q);
        for (std::size_t t = 0; t < q; ++t) {
            perron_.push_back(model.perron[t].mid_ld());
        }
    }

    long double alpha() const { return alpha_; }
    long double perron(int t) const { return perron_[t]; }

    Node root(int type) const
    {
        Node n;
        n.left = 0;
        n.len = 1;
        n.lo = 0;
        n.ln = 1;
        n.prefix = 0;
        n.mass = perron_[type];
        n.type = type;
        n.depth = 0;
        return n;
    }

    std::size_t child_count(const Node& n) const { return table_.types[n.type].children.size(); }

    void children(const Node& n, std::vector<Node>& out, int anchor_depth, int* anchor_counter = nullptr) const
    {
        const auto& kids = table_.types[n.type].children;
        long double acc = n.prefix;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            Node c;
            c.left = n.left + kids[i].offset * n.len;
            c.len = kids[i].ratio * n.len;
            c.lo = n.lo + offsets_[n.type][i] * n.ln;
            c.ln = ratios_[n.type][i] * n.ln;
            c.mass = n.mass * weights_[n.type][i];
            c.prefix = acc;
            acc += c.mass;
            c.type = kids[i].type;
            c.depth = n.depth + 1;
            c.anchor = n.anchor;
            if (c.depth == anchor_depth && anchor_counter != nullptr) {
                c.anchor = (*anchor_counter)++;
            }
            out.push_back(std::move(c));
        }
    }

    long double density(long double mass, long double len) const { return mass / std::pow(len, alpha_); }

private:
    const TypeTable& table_;
    long double alpha_ = 0;
    std::vector<std::vector<long double>> weights_, offsets_, ratios_;
    std::vector<long double> perron_;
};

// error margin of a long double density whose length is `len`
long double margin(long double len)
{
    return kSlack + 64 * LDBL_EPSILON / std::max(len, LDBL_MIN);
}

std::string witness_key(const DensityWitness& w)
{
    const Rational span = w.right - w.left;
    std::vector<std::pair<int, Rational>> parts;
    parts.reserve(w.islands.size());
    for (const auto& [t, len] : w.islands) {
        parts.emplace_back(t, len / span);
    }
    std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first < b.first;
        }
        return a.second < b.second;
    });
    std::string key;
    for (const auto& [t, r] : parts) {
        key += std::to_string(t) + ":" + format_rational(r) + ";";
    }
    return key;
}

struct Candidate {
    Rational left;
    Rational right;
};

bool candidate_less(const Candidate& a, const Candidate& b)
{
    if (a.left != b.left) {
        return a.left < b.left;
    }
    return a.right < b.right;
}

std::vector<TypedIsland> decompose_in(const TypeTable& table, const TypedIsland& root, const Rational& x,
                                      const Rational& y, int k)
{
    std::vector<TypedIsland> out;
    struct Item {
        TypedIsland node;
        int depth;
    };
    std::vector<Item> stack{{root, 0}};
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        const Rational right = it.node.right();
        if (right <= x || it.node.left >= y) {
            continue;
        }
        if (it.node.left >= x && right <= y) {
            out.push_back(it.node);
            continue;
        }
        if (it.depth >= k) {
            throw std::invalid_argument("interval endpoints are not island endpoints of the generation");
        }
        auto kids = expand_children(table, it.node);
        for (auto i = kids.size(); i-- > 0;) {
            stack.push_back({std::move(kids[i]), it.depth + 1});
        }
    }
    std::sort(out.begin(), out.end(), [](const TypedIsland& a, const TypedIsland& b) { return a.left < b.left; });
    return out;
}

DensityWitness witness_in(const TypeTable& table, const MeasureModel& model, const TypedIsland& root,
                          const Rational& x, const Rational& y, int k)
{
    DensityWitness w;
    w.left = x;
    w.right = y;
    for (const auto& isl : decompose_in(table, root, x, y, k)) {
        w.islands.emplace_back(isl.type, isl.length);
    }
    w.value = witness_density(model, w);
    return w;
}

// Groups candidates by their normalized island multiset (equal multisets
// have exactly equal density), certifies one value per group and returns
// the extremal group with the smallest (left, right) member.
DensityWitness certify_extremum(const TypeTable& table, const MeasureModel& model, const TypedIsland& root,
                                std::vector<Candidate> cands, int k, Sense sense)
{
    if (cands.empty()) {
        throw std::logic_error("no candidate intervals");
    }
    std::sort(cands.begin(), cands.end(), candidate_less);
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const Candidate& a, const Candidate& b) {
                                return a.left == b.left && a.right == b.right;
                            }),
                cands.end());
    std::map<std::string, DensityWitness> groups;
    std::vector<std::string> order;
    for (const auto& c : cands) {
        DensityWitness w;
        w.left = c.left;
        w.right = c.right;
        for (const auto& isl : decompose_in(table, root, c.left, c.right, k)) {
            w.islands.emplace_back(isl.type, isl.length);
        }
        std::string key = witness_key(w);
        if (groups.find(key) == groups.end()) {
            w.value = witness_density(model, w);
            groups.emplace(key, std::move(w));
            order.push_back(std::move(key));
        }
    }
    // The extremum lies in [max lo, max hi] (resp. min) whether or not the
    // groups can be ordered. Groups whose enclosure reaches that bound may
    // attain it; the smallest (left, right) among them is the witness.
    CertifiedReal ext = groups.at(order.front()).value;
    for (const auto& key : order) {
        ext = sense == Sense::Max ? max(ext, groups.at(key).value) : min(ext, groups.at(key).value);
    }
    const DensityWitness* best = nullptr;
    for (const auto& key : order) {
        const DensityWitness& w = groups.at(key);
        const bool may = sense == Sense::Max ? mpfr_greaterequal_p(w.value.hi(), ext.lo()) != 0
                                             : mpfr_lessequal_p(w.value.lo(), ext.hi()) != 0;
        if (!may) {
            continue;
        }
        if (best == nullptr || candidate_less({w.left, w.right}, {best->left, best->right})) {
            best = &w;
        }
    }
    DensityWitness out = *best;
    out.value = ext;
    return out;
}

std::vector<Rational> factor_basis(std::vector<BigInt> nums)
{
    // coprime base by gcd refinement
    std::vector<BigInt> base;
    for (auto& n : nums) {
        if (n > 1) {
            base.push_back(n);
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < base.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < base.size() && !changed; ++j) {
                BigInt g;
                mpz_gcd(g.get_mpz_t(), base[i].get_mpz_t(), base[j].get_mpz_t());
                if (g == 1) {
                    continue;
                }
                changed = true;
                if (base[i] == base[j]) {
                    base.erase(base.begin() + static_cast<long>(j));
                    break;
                }
                BigInt a = base[i] / g;
                BigInt b = base[j] / g;
                base.erase(base.begin() + static_cast<long>(j));
                base.erase(base.begin() + static_cast<long>(i));
                for (auto* v : {&a, &b, &g}) {
                    if (*v > 1) {
                        base.push_back(*v);
                    }
                }
            }
        }
    }
    std::sort(base.begin(), base.end());
    std::vector<Rational> out;
    for (auto& b : base) {
        out.emplace_back(b);
    }
    return out;
}

long valuation(BigInt n, const BigInt& p)
{
    long e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

} // namespace

CertifiedReal witness_density(const MeasureModel& model, const DensityWitness& w)
{
    CertifiedReal mass(0L);
    for (const auto& [t, len] : w.islands) {
        mass += model.island_measure(len, t);
    }
    return mass / model.power(w.right - w.left);
}

std::vector<TypedIsland> decompose_interval(const TypeTable& table, const Rational& x, const Rational& y, int k)
{
    return decompose_in(table, {Rational(0), Rational(1), 0}, x, y, k);
}

DensityWitness make_witness(const TypeTable& table, const MeasureModel& model, const Rational& x, const Rational& y,
                            int k)
{
    return witness_in(table, model, {Rational(0), Rational(1), 0}, x, y, k);
}

BoundaryDensity boundary_extremum(const TypeTable& table, const MeasureModel& model, Side side, Sense sense,
                                  int generation, int type)
{
    const Tree tree(table, model);
    const long double total = tree.perron(type);
    const bool maximize = sense == Sense::Max;
    long double best = maximize ? -kInf : kInf;
    struct Hit {
        Candidate c;
        long double value;
        long double err;
    };
    std::vector<Hit> hits;

    auto consider = [&](const Rational& xr, long double x, long double p) {
        long double value, len;
        Candidate c;
        if (side == Side::Left) {
            if (xr <= 0) {
                return;
            }
            len = x;
            value = tree.density(p, x);
            c = {Rational(0), xr};
        } else {
            if (xr >= 1) {
                return;
            }
            len = 1 - x;
            value = tree.density(total - p, len);
            c = {xr, Rational(1)};
        }
        const long double err = margin(len);
        if (maximize ? value > best : value < best) {
            best = value;
        }
        if (maximize ? value * (1 + err) >= best * (1 - kSlack) : value * (1 - err) <= best * (1 + kSlack)) {
            hits.push_back({std::move(c), value, err});
        }
    };

    std::vector<Node> stack{tree.root(type)};
    std::vector<Node> kids;
    while (!stack.empty()) {
        Node n = std::move(stack.back());
        stack.pop_back();
        if (n.depth == generation) {
            consider(n.left, n.lo, n.prefix);
            consider(n.left + n.len, n.hi(), n.prefix + n.mass);
            continue;
        }
        // bound over endpoints inside n
        long double bound;
        long double len;
        if (side == Side::Left) {
            if (maximize) {
                len = n.lo;
                bound = n.lo > 0 ? tree.density(n.prefix + n.mass, n.lo) : kInf;
            } else {
                len = n.hi();
                bound = tree.density(n.prefix, n.hi());
            }
        } else {
            if (maximize) {
                len = 1 - n.hi();
                bound = len > 0 ? tree.density(total - n.prefix, len) : kInf;
            } else {
                len = 1 - n.lo;
                bound = tree.density(total - n.prefix - n.mass, len);
            }
        }
        const long double err = margin(std::max(len, LDBL_MIN));
        const bool prune = maximize ? (std::isfinite(bound) && bound * (1 + err) < best * (1 - kSlack))
                                    : (bound * (1 - err) > best * (1 + kSlack));
        if (prune) {
            continue;
        }
        kids.clear();
        tree.children(n, kids, -1);
        for (auto i = kids.size(); i-- > 0;) {
            stack.push_back(std::move(kids[i]));
        }
    }
    std::vector<Candidate> cands;
    for (auto& h : hits) {
        const bool keep = maximize ? h.value * (1 + h.err) >= best * (1 - kSlack)
                                   : h.value * (1 - h.err) <= best * (1 + kSlack);
        if (keep) {
            cands.push_back(std::move(h.c));
        }
    }
    BoundaryDensity out;
    out.generation = generation;
    out.witness = certify_extremum(table, model, {Rational(0), Rational(1), type}, std::move(cands), generation, sense);
    out.value = out.witness.value;
    return out;
}

int lower_boundary_depth(const TypeTable& table, int type, Side side, const Rational& rho, int cap)
{
    Rational r = 1;
    int t = type;
    for (int d = 0; d <= cap; ++d) {
        if (r <= rho) {
            return d;
        }
        const auto& kids = table.types[t].children;
        const auto& c = side == Side::Left ? kids.front() : kids.back();
        r *= c.ratio;
        t = c.type;
    }
    throw ThresholdInfeasible("edge island never shrinks below the edge ratio", cap);
}

int lower_boundary_generation(const TypeTable& table, const IFSSpec& spec, Side side, int cap)
{
    return lower_boundary_depth(table, 0, side, side == Side::Left ? spec.first().ratio : spec.last().ratio, cap);
}

int threshold_generation(const TypeTable& table, const MeasureModel& model, const CertifiedReal& x,
                         const Rational& factor, int from, int cap)
{
    const CertifiedReal expo = CertifiedReal(1L) / (CertifiedReal(1L) - model.alpha);
    const CertifiedReal rhs = pow_certified(x, expo);
    int found = -1;
    for_each_profile(table, cap, [&](const GenerationProfile& p) {
        if (p.k < from) {
            return true;
        }
        const CertifiedReal lhs(factor * p.beta_max);
        switch (compare(lhs, rhs)) {
        case Ordering::Less:
            found = p.k;
            return false;
        case Ordering::Greater:
            return true;
        default:
            throw UndecidableComparison("threshold inequality cannot be decided");
        }
    });
    if (found < 0) {
        throw ThresholdInfeasible("threshold generation beyond " + std::to_string(cap), cap);
    }
    return found;
}

EdgeAnchors edge_anchors(const TypeTable& table, const IFSSpec& spec)
{
    EdgeAnchors out;
    const Rational& rho1 = spec.first().ratio;
    const Rational& rhom = spec.last().ratio;
    bool first = true;
    for (const auto& t : table.types) {
        const auto& sig = table.states[t.representative_state].signature;
        const NormalizedVertex* v0 = nullptr;
        const NormalizedVertex* v1 = nullptr;
        for (const auto& v : sig) {
            if (v.offset == 0) {
                if (v0 != nullptr) {
                    throw AssumptionViolated("two constitutive intervals share the left end of a type " +
                                             std::to_string(t.id + 1) + " island");
                }
                v0 = &v;
            }
            if (v.offset + v.ratio == 1) {
                if (v1 != nullptr) {
                    throw AssumptionViolated("two constitutive intervals share the right end of a type " +
                                             std::to_string(t.id + 1) + " island");
                }
                v1 = &v;
            }
        }
        if (v0 == nullptr || v1 == nullptr) {
            throw std::logic_error("island without edge vertex");
        }
        EdgeAnchor a;
        a.v0_ratio = v0->ratio;
        a.v1_ratio = v1->ratio;
        Rational eta2_here = 1;
        if (sig.size() > 1) {
            std::optional<Rational> cprime, dprime;
            for (const auto& v : sig) {
                if (&v != v0 && (!cprime || v.offset < *cprime)) {
                    cprime = v.offset;
                }
                if (&v != v1 && (!dprime || v.offset + v.ratio > *dprime)) {
                    dprime = v.offset + v.ratio;
                }
            }
            Rational len = v0->ratio;
            a.i0 = 0;
            do {
                len *= rho1;
                ++a.i0;
            } while (!(len < *cprime));
            len = v1->ratio;
            a.i1 = 0;
            do {
                len *= rhom;
                ++a.i1;
            } while (!(1 - len > *dprime));
            eta2_here = min(pow(rho1, a.i0), pow(rhom, a.i1));
        }
        const Rational eta1_here = min(a.v0_ratio, a.v1_ratio);
        if (first) {
            out.eta1 = eta1_here;
            out.eta2 = eta2_here;
            first = false;
        } else {
            out.eta1 = min(out.eta1, eta1_here);
            out.eta2 = min(out.eta2, eta2_here);
        }
        out.per_type.push_back(std::move(a));
    }
    out.eta = out.eta1 * out.eta2;
    return out;
}

std::optional<std::pair<long, long>> commensurability(const Rational& rho1, const Rational& rhom)
{
    const auto base =
        factor_basis({rho1.get_num(), rho1.get_den(), rhom.get_num(), rhom.get_den()});
    std::vector<long> e1, em;
    for (const auto& b : base) {
        const BigInt p = b.get_num();
        e1.push_back(valuation(rho1.get_num(), p) - valuation(rho1.get_den(), p));
        em.push_back(valuation(rhom.get_num(), p) - valuation(rhom.get_den(), p));
    }
    // need n1 * e1 == nm * em with n1, nm > 0
    std::optional<std::pair<long, long>> ratio;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (e1[i] == 0 && em[i] == 0) {
            continue;
        }
        if (e1[i] == 0 || em[i] == 0 || (e1[i] > 0) != (em[i] > 0)) {
            return std::nullopt;
        }
        long a = std::labs(em[i]);
        long b = std::labs(e1[i]);
        const long g = std::gcd(a, b);
        a /= g;
        b /= g;
        if (ratio && *ratio != std::make_pair(a, b)) {
            return std::nullopt;
        }
        ratio = std::make_pair(a, b);
    }
    if (!ratio || pow(rho1, ratio->first) != pow(rhom, ratio->second)) {
        return std::nullopt;
    }
    return ratio;
}

CertifiedReal dist_to_attractor(const TypeTable& table, const Rational& x, const Rational& eps)
{
    auto node_dist = [&](const TypedIsland& n) -> Rational {
        if (x < n.left) {
            return n.left - x;
        }
        const Rational r = n.right();
        if (x > r) {
            return x - r;
        }
        return 0;
    };
    auto end_dist = [&](const TypedIsland& n) -> Rational {
        return min(abs(x - n.left), abs(n.right() - x));
    };
    std::vector<TypedIsland> cur{{Rational(0), Rational(1), 0}};
    for (int depth = 0; depth < 100000; ++depth) {
        Rational lo = node_dist(cur.front());
        Rational hi = end_dist(cur.front());
        for (const auto& n : cur) {
            lo = min(lo, node_dist(n));
            hi = min(hi, end_dist(n));
        }
        if (hi - lo <= eps || lo == hi) {
            return CertifiedReal::hull(CertifiedReal(lo), CertifiedReal(hi));
        }
        std::vector<TypedIsland> next;
        for (const auto& n : cur) {
            if (node_dist(n) > hi) {
                continue;
            }
            for (auto& c : expand_children(table, n)) {
                if (node_dist(c) <= hi) {
                    next.push_back(std::move(c));
                }
            }
        }
        if (next.size() > 1'000'000) {
            throw FrameTooLarge("distance descent visits too many islands", next.size());
        }
        cur = std::move(next);
    }
    throw std::logic_error("distance descent did not terminate");
}

const char* to_string(MaxCase c)
{
    switch (c) {
    case MaxCase::SeparatedLakes:
        return "separated-lakes";
    case MaxCase::TouchingArithmetic:
        return "touching-arithmetic";
    case MaxCase::TouchingNonArithmetic:
        return "touching-non-arithmetic";
    case MaxCase::FullInterval:
        return "full-interval";
    }
    return "?";
}

// ---------------------------------------------------------------- search

namespace
{

struct PairTask {
    Node a;
    Node b;
    bool same = false;
};

class PairSearch
{
public:
    PairSearch(const TypeTable& table, const MeasureModel& model, int k, const SearchOptions& opt,
               long double incumbent)
        : tree_(table, model), k_(k), anchor_depth_(table.k0 + 1), opt_(opt)
    {
        best_.store(static_cast<double>(std::max<long double>(incumbent, 1.0L)));
        deadline_ = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(static_cast<long long>(opt.budget_seconds * 1000));
    }

    void run()
    {
        // seed tasks deterministically, then hand them to the workers
        std::vector<PairTask> tasks;
        Node root = tree_.root(0);
        std::vector<PairTask> frontier{{root, root, true}};
        const std::size_t want = static_cast<std::size_t>(std::max(1, opt_.workers)) * 64;
        std::vector<Node> kids;
        while (!frontier.empty() && frontier.size() < want) {
            std::vector<PairTask> next;
            bool split_any = false;
            for (auto& t : frontier) {
                if (t.same && opt_.constrained && t.a.depth >= anchor_depth_) {
                    continue;
                }
                if (!t.same || t.a.depth >= k_) {
                    next.push_back(std::move(t));
                    continue;
                }
                split_any = true;
                kids.clear();
                tree_.children(t.a, kids, -1);
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    for (std::size_t j = i; j < kids.size(); ++j) {
                        next.push_back({kids[i], kids[j], i == j});
                    }
                }
            }
            frontier = std::move(next);
            if (!split_any) {
                break;
            }
        }
        tasks = std::move(frontier);
        std::atomic<std::size_t> next_task{0};
        std::vector<std::vector<Hit>> hits(static_cast<std::size_t>(std::max(1, opt_.workers)));
        std::vector<std::size_t> visited(hits.size(), 0);
        std::atomic<bool> timed_out{false};
        auto worker = [&](std::size_t w) {
            std::vector<PairTask> stack;
            std::vector<Node> ka, kb;
            while (true) {
                const std::size_t i = next_task.fetch_add(1);
                if (i >= tasks.size() || timed_out.load()) {
                    break;
                }
                stack.clear();
                stack.push_back(tasks[i]);
                while (!stack.empty()) {
                    if ((++visited[w] & 0xfff) == 0 && std::chrono::steady_clock::now() > deadline_) {
                        timed_out.store(true);
                        break;
                    }
                    PairTask t = std::move(stack.back());
                    stack.pop_back();
                    expand(t, stack, hits[w], ka, kb);
                }
            }
        };
        if (hits.size() == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < hits.size(); ++w) {
                pool.emplace_back(worker, w);
            }
            for (auto& th : pool) {
                th.join();
            }
        }
        for (auto v : visited) {
            pairs_visited += v;
        }
        if (timed_out.load()) {
            throw BudgetExhausted("search budget exhausted", best_.load());
        }
        const long double best = best_.load();
        for (auto& hv : hits) {
            for (auto& h : hv) {
                if (h.value * (1 + h.err) >= best * (1 - kSlack)) {
                    candidates.push_back(std::move(h.c));
                }
            }
        }
        best_value = best;
    }

    std::vector<Candidate> candidates;
    std::size_t pairs_visited = 0;
    long double best_value = 0;

private:
    struct Hit {
        Candidate c;
        long double value;
        long double err;
    };

    void offer(const Rational& x, long double xl, long double px, const Rational& y, long double yl, long double py,
               std::vector<Hit>& hits)
    {
        if (!(x < y)) {
            return;
        }
        const long double len = yl - xl;
        if (len <= 0) {
            return;
        }
        const long double v = tree_.density(py - px, len);
        const long double err = margin(len);
        double cur = best_.load(std::memory_order_relaxed);
        while (v > cur && !best_.compare_exchange_weak(cur, static_cast<double>(v))) {
        }
        cur = best_.load(std::memory_order_relaxed);
        if (v * (1 + err) >= cur * (1 - kSlack)) {
            hits.push_back({{x, y}, v, err});
        }
    }

    long double upper_bound(const PairTask& t) const
    {
        const long double gap = t.b.lo - t.a.hi();
        if (t.same || gap <= 16 * LDBL_EPSILON) {
            return kInf;
        }
        return tree_.density(t.b.prefix + t.b.mass - t.a.prefix, gap);
    }

    void expand(const PairTask& t, std::vector<PairTask>& stack, std::vector<Hit>& hits, std::vector<Node>& ka,
                std::vector<Node>& kb)
    {
        if (t.same) {
            if (opt_.constrained && t.a.depth >= anchor_depth_) {
                return;
            }
            if (t.a.depth >= k_) {
                offer(t.a.left, t.a.lo, t.a.prefix, t.a.left + t.a.len, t.a.hi(), t.a.prefix + t.a.mass, hits);
                return;
            }
            ka.clear();
            tree_.children(t.a, ka, -1);
            push_sorted(stack, ka, ka, true);
            return;
        }
        const long double ub = upper_bound(t);
        if (std::isfinite(ub)) {
            const long double gap = t.b.lo - t.a.hi();
            const long double err = margin(gap);
            // the hull [a.left, b.right] is itself a field interval
            const long double hull = tree_.density(t.b.prefix + t.b.mass - t.a.prefix, t.b.hi() - t.a.lo);
            double cur = best_.load(std::memory_order_relaxed);
            while (hull > cur && !best_.compare_exchange_weak(cur, static_cast<double>(hull))) {
            }
            if (ub * (1 + err) < best_.load(std::memory_order_relaxed) * (1 - kSlack)) {
                return;
            }
        }
        const bool a_leaf = t.a.depth >= k_;
        const bool b_leaf = t.b.depth >= k_;
        if (a_leaf && b_leaf) {
            const Rational ar = t.a.left + t.a.len;
            const Rational br = t.b.left + t.b.len;
            offer(t.a.left, t.a.lo, t.a.prefix, t.b.left, t.b.lo, t.b.prefix, hits);
            offer(t.a.left, t.a.lo, t.a.prefix, br, t.b.hi(), t.b.prefix + t.b.mass, hits);
            offer(ar, t.a.hi(), t.a.prefix + t.a.mass, t.b.left, t.b.lo, t.b.prefix, hits);
            offer(ar, t.a.hi(), t.a.prefix + t.a.mass, br, t.b.hi(), t.b.prefix + t.b.mass, hits);
            return;
        }
        const bool split_a = !a_leaf && (b_leaf || t.a.ln >= t.b.ln);
        if (split_a) {
            ka.clear();
            tree_.children(t.a, ka, -1);
            kb.assign(1, t.b);
        } else {
            ka.assign(1, t.a);
            kb.clear();
            tree_.children(t.b, kb, -1);
        }
        push_sorted(stack, ka, kb, false);
    }

    void push_sorted(std::vector<PairTask>& stack, const std::vector<Node>& as, const std::vector<Node>& bs,
                     bool same_parent)
    {
        std::vector<std::pair<long double, PairTask>> items;
        for (std::size_t i = 0; i < as.size(); ++i) {
            for (std::size_t j = same_parent ? i : 0; j < bs.size(); ++j) {
                PairTask p{as[i], bs[j], same_parent && i == j};
                const long double ub = upper_bound(p);
                items.emplace_back(ub, std::move(p));
            }
        }
        // highest bound ends on top of the stack
        std::stable_sort(items.begin(), items.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto& it : items) {
            stack.push_back(std::move(it.second));
        }
    }

    Tree tree_;
    int k_;
    int anchor_depth_;
    SearchOptions opt_;
    std::atomic<double> best_{1.0};
    std::chrono::steady_clock::time_point deadline_;
};

struct FlatIsland {
    Rational left;
    Rational right;
    long double lo, hi, prefix, mass;
    int anchor;
};

std::vector<FlatIsland> flat_frame(const TypeTable& table, const MeasureModel& model, int k)
{
    const Tree tree(table, model);
    int counter = 0;
    const int anchor_depth = table.k0 + 1;
    std::vector<Node> cur{tree.root(0)};
    if (anchor_depth == 0) {
        cur[0].anchor = counter++;
    }
    for (int d = 0; d < k; ++d) {
        std::vector<Node> next;
        for (const auto& n : cur) {
            tree.children(n, next, anchor_depth, &counter);
        }
        cur = std::move(next);
    }
    std::vector<FlatIsland> out;
    out.reserve(cur.size());
    for (auto& n : cur) {
        out.push_back({n.left, n.left + n.len, n.lo, n.hi(), n.prefix, n.mass, n.anchor});
    }
    return out;
}

} // namespace

SearchResult search_field_max(const TypeTable& table, const MeasureModel& model, int k, const SearchOptions& opt,
                              long double incumbent)
{
    SearchResult res;
    res.generation = k;
    const BigInt count = generation_profile(table, k).island_count;
    std::vector<Candidate> cands;
    if (count * 2 <= BigInt(static_cast<unsigned long>(opt.exhaustive_limit))) {
        res.exhaustive = true;
        const auto isl = flat_frame(table, model, k);
        const Tree tree(table, model);
        long double best = std::max<long double>(incumbent, 1.0L);
        struct Hit {
            std::size_t i, j;
            int sx, sy;
            long double v, err;
        };
        std::vector<Hit> hits;
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::milliseconds(static_cast<long long>(opt.budget_seconds * 1000));
        for (std::size_t i = 0; i < isl.size(); ++i) {
            if ((i & 0xff) == 0 && std::chrono::steady_clock::now() > deadline) {
                throw BudgetExhausted("search budget exhausted", best);
            }
            for (int sx = 0; sx < 2; ++sx) {
                const long double x = sx == 0 ? isl[i].lo : isl[i].hi;
                const long double px = sx == 0 ? isl[i].prefix : isl[i].prefix + isl[i].mass;
                for (std::size_t j = i; j < isl.size(); ++j) {
                    if (opt.constrained && isl[i].anchor >= 0 && isl[i].anchor == isl[j].anchor) {
                        continue;
                    }
                    for (int sy = 0; sy < 2; ++sy) {
                        if (j == i && !(sx == 0 && sy == 1)) {
                            continue;
                        }
                        const long double y = sy == 0 ? isl[j].lo : isl[j].hi;
                        const long double py = sy == 0 ? isl[j].prefix : isl[j].prefix + isl[j].mass;
                        const long double len = y - x;
                        if (len <= 0) {
                            continue;
                        }
                        ++res.pairs_visited;
                        const long double v = tree.density(py - px, len);
                        const long double err = margin(len);
                        best = std::max(best, v);
                        if (v * (1 + err) >= best * (1 - kSlack)) {
                            hits.push_back({i, j, sx, sy, v, err});
                        }
                    }
                }
            }
        }
        for (const auto& h : hits) {
            if (h.v * (1 + h.err) >= best * (1 - kSlack)) {
                const Rational& x = h.sx == 0 ? isl[h.i].left : isl[h.i].right;
                const Rational& y = h.sy == 0 ? isl[h.j].left : isl[h.j].right;
                if (x < y) {
                    cands.push_back({x, y});
                }
            }
        }
    } else {
        PairSearch search(table, model, k, opt, incumbent);
        search.run();
        res.pairs_visited = search.pairs_visited;
        cands = std::move(search.candidates);
    }
    // [0,1] has density 1 and is a field interval of every generation
    cands.push_back({Rational(0), Rational(1)});
    res.candidates = cands.size();
    res.witness = certify_extremum(table, model, {Rational(0), Rational(1), 0}, std::move(cands), k, Sense::Max);
    res.value = res.witness.value;
    return res;
}

// ---------------------------------------------------------------- theorems

LowerBoundaries lower_boundaries(const DensityContext& ctx)
{
    const auto& table = *ctx.table;
    const auto& model = *ctx.model;
    const auto& spec = *ctx.spec;
    LowerBoundaries out;
    const int k0 = lower_boundary_generation(table, spec, Side::Left);
    const int k1 = lower_boundary_generation(table, spec, Side::Right);
    out.d0 = boundary_extremum(table, model, Side::Left, Sense::Min, k0);
    out.d1 = boundary_extremum(table, model, Side::Right, Sense::Min, k1);
    if (spec.mode == Mode::RelaxedB) {
        CertifiedReal m0 = out.d0.value;
        CertifiedReal m1 = out.d1.value;
        out.d0_per_type.push_back(out.d0.value);
        out.d1_per_type.push_back(out.d1.value);
        for (std::size_t t = 1; t < table.q(); ++t) {
            const int ti = static_cast<int>(t);
            const int g0 = lower_boundary_depth(table, ti, Side::Left, spec.first().ratio);
            const int g1 = lower_boundary_depth(table, ti, Side::Right, spec.last().ratio);
            auto b0 = boundary_extremum(table, model, Side::Left, Sense::Min, std::max(g0, 1), ti);
            auto b1 = boundary_extremum(table, model, Side::Right, Sense::Min, std::max(g1, 1), ti);
            out.d0_per_type.push_back(b0.value);
            out.d1_per_type.push_back(b1.value);
            if (compare(b0.value, m0) == Ordering::Less) {
                m0 = b0.value;
                out.d0 = b0;
            }
            if (compare(b1.value, m1) == Ordering::Less) {
                m1 = b1.value;
                out.d1 = b1;
            }
        }
        if (compare(out.d1.value, out.d0.value) == Ordering::Greater) {
            throw AssumptionViolated("relaxed mode requires the right boundary density not to exceed the left one");
        }
        if (compare(out.d1.value, out.d0.value) == Ordering::Unordered &&
            !(mpfr_equal_p(out.d1.value.lo(), out.d0.value.lo()) && mpfr_equal_p(out.d1.value.hi(), out.d0.value.hi()))) {
            throw UndecidableComparison("relaxed mode guard cannot be decided");
        }
    }
    out.kappa = min(out.d0.value, out.d1.value);
    return out;
}

DmaxResult compute_dmax(const DensityContext& ctx, const LowerBoundaries& lower, int max_generation,
                        const SearchOptions& opt)
{
    const auto& table = *ctx.table;
    const auto& model = *ctx.model;
    const auto& spec = *ctx.spec;
    DmaxResult out;
    if (model.full) {
        out.case_taken = MaxCase::FullInterval;
        out.d_max = CertifiedReal(1L);
        out.witness = make_witness(table, model, Rational(0), Rational(1), 0);
        return out;
    }
    const int k0 = table.k0;
    const GenerationProfile prof = generation_profile(table, k0 + 1);
    {
        // touching pairs of generation k0+1, for the report
        const auto frame = expand_frame(table, k0 + 1);
        for (std::size_t i = 0; i + 1 < frame.size(); ++i) {
            if (frame[i].right() == frame[i + 1].left) {
                out.touching.push_back(i);
            }
        }
    }
    const bool separated = prof.gamma_min && *prof.gamma_min > 0;
    CertifiedReal x;
    if (separated || !prof.gamma_min) {
        out.case_taken = MaxCase::SeparatedLakes;
        const Rational gamma = prof.gamma_min ? *prof.gamma_min : Rational(1);
        x = CertifiedReal(gamma) * lower.kappa;
    } else {
        const EdgeAnchors anchors = edge_anchors(table, spec);
        out.eta = anchors.eta;
        out.n = commensurability(spec.first().ratio, spec.last().ratio);
        if (out.n) {
            out.case_taken = MaxCase::TouchingArithmetic;
            x = CertifiedReal(anchors.eta * prof.beta_min * pow(spec.first().ratio, out.n->first)) * lower.kappa;
        } else {
            out.case_taken = MaxCase::TouchingNonArithmetic;
            Rational m = prof.beta_min;
            if (prof.gamma_min_pos) {
                m = min(m, *prof.gamma_min_pos);
            }
            x = CertifiedReal(anchors.eta * m) * lower.kappa;
        }
    }
    out.k = threshold_generation(table, model, x, Rational(2), k0 + 1);
    if (out.case_taken == MaxCase::TouchingNonArithmetic) {
        out.k1 = threshold_generation(table, model, CertifiedReal(spec.first().ratio) * lower.d1.value, Rational(1), 0);
        out.k2 = threshold_generation(table, model, CertifiedReal(spec.last().ratio) * lower.d0.value, Rational(1), 0);
    }
    const int needed = std::max({out.k, out.k1.value_or(0), out.k2.value_or(0)});
    if (needed > max_generation) {
        throw ThresholdInfeasible("maximal density needs generation " + std::to_string(needed) +
                                      ", above the limit " + std::to_string(max_generation),
                                  needed);
    }
    // iterative deepening: shallower generations seed the incumbent
    long double incumbent = 1;
    for (int g = k0 + 1; g < out.k; ++g) {
        SearchOptions quick = opt;
        auto r = search_field_max(table, model, g, quick, incumbent);
        incumbent = std::max(incumbent, r.value.mid_ld() * (1 - 1e-15L));
    }
    out.search = search_field_max(table, model, out.k, opt, incumbent);
    out.d_max = out.search.value;
    out.witness = out.search.witness;
    if (out.case_taken == MaxCase::TouchingNonArithmetic) {
        out.upper0 = boundary_extremum(table, model, Side::Left, Sense::Max, *out.k1);
        out.upper1 = boundary_extremum(table, model, Side::Right, Sense::Max, *out.k2);
        const CertifiedReal p = CertifiedReal(1L) / (CertifiedReal(1L) - model.alpha);
        const CertifiedReal q = CertifiedReal(1L) - model.alpha;
        out.combined = pow_certified(pow_certified(out.upper0->value, p) + pow_certified(out.upper1->value, p), q);
        const Ordering o = compare(*out.combined, out.d_max);
        if (o == Ordering::Unordered) {
            throw UndecidableComparison("combined edge value cannot be ordered against the field maximum");
        }
        if (o == Ordering::Greater) {
            out.combined_wins = true;
            out.d_max = *out.combined;
        }
    }
    return out;
}

DminResult compute_dmin(const DensityContext& ctx, const LowerBoundaries& lower)
{
    const auto& table = *ctx.table;
    const auto& model = *ctx.model;
    const auto& spec = *ctx.spec;
    DminResult out;
    if (model.full) {
        out.d_min = CertifiedReal(1L);
        out.big_d = CertifiedReal(1L);
        out.attained_by = "full";
        return out;
    }
    const int g = table.k0 + 1;
    const auto isl = expand_frame(table, g);
    const std::size_t l = isl.size();
    std::vector<CertifiedReal> mass;
    mass.reserve(l);
    for (const auto& i : isl) {
        mass.push_back(model.island_measure(i.length, i.type));
    }
    const double tol = std::min(spec.tolerances.dist_tol, std::ldexp(1.0, -static_cast<int>(working_precision() / 2)));
    Rational eps(tol);
    std::optional<CertifiedReal> best;
    std::size_t bi1 = 0, bi2 = 0;
    CertifiedReal best_dist;
    // 0-based: i1 < i2 <= l - 2, islands i1+1..i2 in the numerator
    for (std::size_t i1 = 0; i1 + 2 < l; ++i1) {
        CertifiedReal num(0L);
        for (std::size_t i2 = i1 + 1; i2 + 1 < l; ++i2) {
            num += mass[i2];
            const Rational b = isl[i1].right();
            const Rational a = isl[i2 + 1].left;
            const Rational mid = (a + b) / 2;
            const CertifiedReal dist = dist_to_attractor(table, mid, eps);
            const CertifiedReal den = CertifiedReal(a - b) - CertifiedReal(2L) * dist;
            if (!den.positive()) {
                continue;
            }
            const CertifiedReal v = num / pow_certified(den, model.alpha);
            if (!best) {
                best = v;
                bi1 = i1;
                bi2 = i2;
                best_dist = dist;
                continue;
            }
            const Ordering o = compare(v, *best);
            if (o == Ordering::Less) {
                best = v;
                bi1 = i1;
                bi2 = i2;
                best_dist = dist;
            } else if (o == Ordering::Unordered) {
                // keep the earlier pair; the value is the common enclosure
                best = min(*best, v);
            }
        }
    }
    const CertifiedReal scale = pow_certified(Rational(1, 2), model.alpha);
    const CertifiedReal c0 = scale * lower.d0.value;
    const CertifiedReal c1 = scale * lower.d1.value;
    std::vector<std::pair<std::string, CertifiedReal>> terms;
    if (spec.mode != Mode::RelaxedB) {
        terms.emplace_back("D0", c0);
    }
    terms.emplace_back("D1", c1);
    if (best) {
        out.big_d_finite = true;
        out.big_d = *best;
        DensityWitness w;
        w.left = isl[bi1].right();
        w.right = isl[bi2 + 1].left;
        for (std::size_t i = bi1 + 1; i <= bi2; ++i) {
            w.islands.emplace_back(isl[i].type, isl[i].length);
        }
        w.value = *best;
        out.big_d_witness = w;
        out.big_d_midpoint = (w.left + w.right) / 2;
        terms.emplace_back("D", *best);
    }
    CertifiedReal m = terms.front().second;
    for (const auto& t : terms) {
        m = min(m, t.second);
    }
    out.d_min = m;
    for (const auto& t : terms) {
        // first term that may attain the minimum
        if (mpfr_lessequal_p(t.second.lo(), m.hi())) {
            out.attained_by = t.first;
            break;
        }
    }
    return out;
}

} // namespace gftc
