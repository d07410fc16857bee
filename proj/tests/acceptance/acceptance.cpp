// One line per acceptance criterion. Exit status is the number of failures.
#include "gftc/report.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace gftc;
using json = nlohmann::json;
using ld = long double;

namespace
{

std::string config(const std::string& name)
{
    return std::string(GFTC_CONFIG_DIR) + "/" + name + ".json";
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Proc {
    int code = -1;
    std::string out;
    double seconds = 0;
};

Proc run_cli(const std::string& args, int workers)
{
    const std::string cmd =
        "GFTC_WORKERS=" + std::to_string(workers) + " " + GFTC_CLI_PATH + " " + args + " 2>/dev/null";
    Proc p;
    const auto t0 = std::chrono::steady_clock::now();
    FILE* f = popen(cmd.c_str(), "r");
    if (f == nullptr) {
        return p;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) {
        p.out.append(buf.data(), n);
    }
    const int st = pclose(f);
    p.seconds = seconds_since(t0);
    p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return p;
}

// every CLI invocation is run three times (workers 1, 1, 4) and the outputs compared
struct CliRecord {
    std::string args;
    bool identical = false;
};
std::vector<CliRecord> cli_log;

struct CliResult {
    int code = -1;
    json report;
    double seconds = 0;
};

CliResult cli(const std::string& args)
{
    const Proc a = run_cli(args, 1);
    const Proc b = run_cli(args, 1);
    const Proc c = run_cli(args, 4);
    cli_log.push_back({args, a.out == b.out && a.out == c.out && a.code == b.code && a.code == c.code});
    CliResult r;
    r.code = a.code;
    r.seconds = a.seconds;
    r.report = json::parse(a.out, nullptr, false);
    return r;
}

ld mid(const json& j)
{
    if (!j.is_object() || !j.contains("mid")) {
        return NAN;
    }
    return j["mid"].get<ld>();
}

// collects sub-checks of one criterion
struct Criterion {
    int id;
    std::string title;
    std::vector<std::string> failures;
    int checks = 0;

    void expect(bool ok, const std::string& what)
    {
        ++checks;
        if (!ok) {
            failures.push_back(what);
        }
    }
    void near(ld got, ld want, ld tol, const std::string& what)
    {
        std::ostringstream os;
        os.precision(15);
        os << what << ": got " << got << ", want " << want << " (tol " << static_cast<double>(tol) << ")";
        expect(std::isfinite(got) && std::fabs(got - want) <= tol, os.str());
    }
    void fast(double secs, double limit, const std::string& what)
    {
        std::ostringstream os;
        os << what << " took " << secs << " s (limit " << limit << " s)";
        expect(secs < limit, os.str());
    }
};

int failed_total = 0;

void report(const Criterion& c)
{
    const bool ok = c.failures.empty();
    if (!ok) {
        ++failed_total;
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " (" << c.checks << " checks";
    if (!ok) {
        std::cout << ", " << c.failures.size() << " failed";
    }
    std::cout << ")\n";
    for (const auto& f : c.failures) {
        std::cout << "    " << f << "\n";
    }
    std::cout.flush();
}

constexpr ld published4 = 5e-5L;

// bisection on a function increasing then crossing zero once on [lo, hi]
ld bisect(const std::function<ld(ld)>& f, ld lo, ld hi)
{
    const bool rising = f(lo) < 0;
    for (int i = 0; i < 200; ++i) {
        const ld m = (lo + hi) / 2;
        if ((f(m) < 0) == rising) {
            lo = m;
        } else {
            hi = m;
        }
    }
    return (lo + hi) / 2;
}

// independent dimension values
ld alpha_two_five(ld rho, ld r)
{
    return bisect([&](ld a) { return std::pow(rho, a) + 2 * std::pow(r, a) - std::pow(rho * r, a) - 1; }, 1e-6L, 1);
}
const ld log3 = std::log(3.0L);
const ld alpha_cantor = std::log(2.0L) / log3;
const ld alpha_sixteenths = std::log(2 / (3 - std::sqrt(5.0L))) / std::log(16.0L);
const ld alpha_touching = std::log(5 + std::sqrt(5.0L)) / std::log(4.0L) - 0.5L;
const ld alpha_relaxed = std::log((3 + std::sqrt(5.0L)) / 2) / std::log(6.0L);
ld alpha_lambda()
{
    const auto p = [](ld x) { return ((x - 6) * x + 5) * x - 1; };
    const ld root = bisect(p, 4, 6); // the largest root lies in (5, 5.1)
    return std::log(root) / std::log(9.0L);
}

ld pw(ld b, ld a)
{
    return std::pow(b, a);
}

struct Loaded {
    IFSSpec spec;
    TypeTable table;
    MeasureModel model;
    DensityContext ctx() const { return {&spec, &table, &model}; }
};

std::unique_ptr<Loaded> load(const IFSSpec& spec)
{
    auto p = std::make_unique<Loaded>();
    p->spec = spec;
    p->table = classify_types(p->spec);
    p->model = build_measure(p->table);
    return p;
}

Rational frac(long n, long d)
{
    return make_rational(n, d);
}

void criterion1()
{
    Criterion c{1, "dimension suite", {}, 0};
    auto timed = [&](const std::string& name) {
        const auto t0 = std::chrono::steady_clock::now();
        auto p = load(load_spec(config(name)));
        c.fast(seconds_since(t0), 1.0, name + " dimension");
        return p;
    };
    {
        const auto p = timed("lambda_ninth");
        const ld a = p->model.alpha.mid_ld();
        c.near(a, 0.7369L, published4, "lambda_ninth alpha (published)");
        c.near(a, alpha_lambda(), 1e-12L, "lambda_ninth alpha vs cubic root");
        const ld x = pw(9, a);
        c.near(((x - 6) * x + 5) * x - 1, 0, 1e-12L, "cubic at 9^alpha");
    }
    {
        const auto p = timed("touching_quarters");
        c.near(p->model.alpha.mid_ld(), alpha_touching, 1e-10L, "touching_quarters alpha");
    }
    {
        const auto p = timed("cantor");
        c.near(p->model.alpha.mid_ld(), alpha_cantor, 1e-12L, "cantor alpha");
    }
    std::mt19937 gen(20240611);
    std::uniform_int_distribution<long> den(3, 16);
    int done = 0;
    while (done < 5) {
        const long b = den(gen);
        const long d = den(gen);
        const long a = std::uniform_int_distribution<long>(1, b - 1)(gen);
        const long cn = std::uniform_int_distribution<long>(1, d - 1)(gen);
        const Rational rho = frac(a, b);
        const Rational r = frac(cn, d);
        if (!(rho + 2 * r - rho * r < 1)) {
            continue;
        }
        ++done;
        const std::vector<AffineMap> maps = {{rho, Rational(0)}, {r, rho * (1 - r)}, {r, 1 - r}};
        std::ostringstream tag;
        tag << "third_quarter family rho=" << rho << " r=" << r;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const auto p = load(make_spec(maps));
            c.fast(seconds_since(t0), 1.0, tag.str());
            const ld al = p->model.alpha.mid_ld();
            const ld rl = to_long_double(rho);
            const ld sl = to_long_double(r);
            c.near(pw(rl, al) + 2 * pw(sl, al) - pw(rl * sl, al), 1, 1e-10L, tag.str() + " equation");
            c.near(al, alpha_two_five(rl, sl), 1e-10L, tag.str() + " vs bisection");
        } catch (const std::exception& e) {
            c.expect(false, tag.str() + ": " + e.what());
        }
    }
    report(c);
}

void criterion2()
{
    Criterion c{2, "Hausdorff measures", {}, 0};
    {
        const auto r = cli("hausdorff " + config("sixteenths"));
        c.expect(r.code == exit_ok, "sixteenths exit " + std::to_string(r.code));
        c.fast(r.seconds, 60, "sixteenths");
        const json& d = r.report["density"];
        const ld a = alpha_sixteenths;
        c.expect(d["thresholds"]["k"] == 3, "sixteenths threshold k = " + d["thresholds"]["k"].dump());
        c.near(mid(d["d_max"]), (pw(256, a) - pw(16, a)) / pw(31, a), 1e-8L, "sixteenths d_max");
        c.near(mid(d["hausdorff"]), 0.7775L, published4, "sixteenths H (published)");
    }
    {
        const auto r = cli("hausdorff " + config("relaxed_sixths"));
        c.expect(r.code == exit_ok, "relaxed_sixths exit " + std::to_string(r.code));
        c.fast(r.seconds, 60, "relaxed_sixths");
        const json& d = r.report["density"];
        const ld a = alpha_relaxed;
        c.expect(d["thresholds"]["k"] == 5, "relaxed_sixths threshold k = " + d["thresholds"]["k"].dump());
        c.near(mid(d["d_max"]), 2 * (pw(6, a) - 1) / pw(6, a), 1e-8L, "relaxed_sixths d_max");
        c.near(mid(d["hausdorff"]), 0.8090L, published4, "relaxed_sixths H (published)");
    }
    {
        const auto r = cli("hausdorff " + config("cantor"));
        c.expect(r.code == exit_ok, "cantor exit " + std::to_string(r.code));
        c.fast(r.seconds, 60, "cantor");
        c.near(mid(r.report["density"]["hausdorff"]), 1, 1e-10L, "cantor H");
    }
    report(c);
}

void criterion3()
{
    Criterion c{3, "Hausdorff stretch (Lambda scheme)", {}, 0};
    const ld a = alpha_lambda();
    const ld closed = (pw(27, a) - pw(9, a)) / pw(11, a);
    const auto r = cli("hausdorff --budget 3600 " + config("lambda_ninth"));
    if (r.code == exit_budget_exhausted) {
        // fallback: d(I2) has the closed form and exhaustive search up to k = 6 stays below it
        std::cout << "    search budget exceeded, using the fallback check\n";
        const auto p = load(load_spec(config("lambda_ninth")));
        const auto w = make_witness(p->table, p->model, Rational(0), frac(11, 81), 2);
        c.near(w.value.mid_ld(), closed, 1e-8L, "d(I2)");
        SearchOptions o;
        o.constrained = false;
        for (int k = 0; k <= 6; ++k) {
            const auto s = search_field_max(p->table, p->model, k, o);
            c.expect(s.value.lo_ld() <= closed + 1e-12L, "exhaustive k=" + std::to_string(k) + " exceeds closed form");
        }
    } else {
        c.expect(r.code == exit_ok, "exit " + std::to_string(r.code));
        const json& d = r.report["density"];
        c.expect(d["thresholds"]["k"] == 10, "threshold k = " + d["thresholds"]["k"].dump());
        c.near(mid(d["d_max"]), closed, 1e-8L, "d_max");
        c.near(mid(d["hausdorff"]), 0.9297L, published4, "H (published)");
        c.fast(r.seconds, 3600, "search");
    }
    report(c);
}

void criterion4()
{
    Criterion c{4, "Hausdorff infeasibility", {}, 0};
    const auto r = cli("hausdorff " + config("touching_quarters"));
    c.expect(r.code == exit_threshold_infeasible, "exit " + std::to_string(r.code));
    c.expect(r.report["error"]["detail"]["required_generation"] == 81,
             "required generation " + r.report["error"]["detail"]["required_generation"].dump());
    report(c);
}

void criterion5()
{
    Criterion c{5, "packing measures", {}, 0};
    auto packing = [&](const std::string& name) {
        const auto r = cli("packing " + config(name));
        c.expect(r.code == exit_ok, name + " exit " + std::to_string(r.code));
        c.fast(r.seconds, 60, name);
        return r.report["density"];
    };
    {
        const json d = packing("sixteenths");
        const ld a = alpha_sixteenths;
        c.near(mid(d["packing"]), 3.1843L, published4, "sixteenths P (published)");
        c.near(mid(d["d_min"]), pw(8, a) / pw(225, a), 1e-8L, "sixteenths d_min");
    }
    {
        const json d = packing("lambda_ninth");
        const ld a = alpha_lambda();
        c.near(mid(d["packing"]), 2.5467L, published4, "lambda_ninth P (published)");
        c.near(mid(d["D"]), pw(9, a) / pw(32, a), 1e-8L, "lambda_ninth D");
    }
    {
        const json d = packing("touching_quarters");
        const ld a = alpha_touching;
        c.near(mid(d["packing"]), pw(3, a), 1e-8L, "touching_quarters P");
        c.near(mid(d["packing"]), 2.7706L, published4, "touching_quarters P (published)");
        c.near(mid(d["D"]), 1 / pw(3, a), 1e-8L, "touching_quarters D");
    }
    {
        const json d = packing("relaxed_sixths");
        const ld a = alpha_relaxed;
        c.near(mid(d["packing"]), 3.1709L, published4, "relaxed_sixths P (published)");
        c.near(mid(d["D"]), pw(7, a) / pw(60, a), 1e-8L, "relaxed_sixths D");
    }
    {
        const json d = packing("cantor");
        c.near(mid(d["packing"]), pw(4, alpha_cantor), 1e-10L, "cantor P");
    }
    report(c);
}

void criterion6()
{
    Criterion c{6, "boundary densities", {}, 0};
    struct Case {
        const char* name;
        const char* label;
        ld a;
        ld d0, d1;
        ld p0, p1; // published 4-dp values
    };
    const ld a16 = alpha_sixteenths, alam = alpha_lambda(), atou = alpha_touching, arel = alpha_relaxed;
    const Case cases[] = {
        {"sixteenths", "sixteenths", a16, (pw(16, a16) - 1) / pw(15, a16), pw(16, a16) / pw(225, a16), 0.6320L, 0.3995L},
        {"lambda_ninth", "lambda_ninth", alam, (pw(3, alam) - 1) / pw(2, alam), pw(9, alam) / pw(16, alam), 0.7482L, 0.6544L},
        {"touching_quarters", "touching_quarters", atou, (pw(4, atou) - 1) / pw(3, atou), pw(2, atou) / pw(3, atou), 0.9449L, 0.6865L},
        {"relaxed_sixths", "relaxed_sixths", arel, (pw(6, arel) - 1) / pw(5, arel), pw(7, arel) / pw(30, arel), 0.6816L, 0.4576L},
    };
    for (const auto& k : cases) {
        const auto r = cli("packing " + config(k.name));
        const json& lo = r.report["density"]["lower"];
        const std::string e = k.label;
        c.near(mid(lo["D0_under"]["value"]), k.d0, 1e-8L, e + " D0");
        c.near(mid(lo["D1_under"]["value"]), k.d1, 1e-8L, e + " D1");
        c.near(mid(lo["D0_under"]["value"]), k.p0, published4, e + " D0 (published)");
        c.near(mid(lo["D1_under"]["value"]), k.p1, published4, e + " D1 (published)");
    }
    report(c);
}

// OSC instance with positive gaps; alpha kept moderate so the threshold stays small
IFSSpec random_osc(std::mt19937& gen)
{
    for (;;) {
        const int m = std::uniform_int_distribution<int>(2, 4)(gen);
        std::vector<Rational> ratio;
        ld moran_lo = 0;
        Rational sum = 0;
        for (int j = 0; j < m; ++j) {
            const long d = std::uniform_int_distribution<long>(3, 9)(gen);
            const long n = std::uniform_int_distribution<long>(1, std::max(1L, d / 3))(gen);
            ratio.push_back(frac(n, d));
            sum += ratio.back();
        }
        if (!(sum < 1)) {
            continue;
        }
        std::vector<ld> rl;
        for (const auto& r : ratio) {
            rl.push_back(to_long_double(r));
        }
        moran_lo = bisect(
            [&](ld a) {
                ld s = -1;
                for (ld r : rl) {
                    s += std::pow(r, a);
                }
                return s;
            },
            1e-6L, 1);
        if (moran_lo < 0.3L || moran_lo > 0.75L) {
            continue;
        }
        std::vector<long> w;
        long wsum = 0;
        for (int j = 0; j + 1 < m; ++j) {
            w.push_back(std::uniform_int_distribution<long>(1, 5)(gen));
            wsum += w.back();
        }
        const Rational gap = 1 - sum;
        std::vector<AffineMap> maps;
        Rational x = 0;
        for (int j = 0; j < m; ++j) {
            maps.push_back({ratio[static_cast<std::size_t>(j)], x});
            x += ratio[static_cast<std::size_t>(j)];
            if (j + 1 < m) {
                x += gap * Rational(w[static_cast<std::size_t>(j)]) / Rational(wsum);
            }
        }
        return make_spec(maps);
    }
}

ld moran(const IFSSpec& spec)
{
    return bisect(
        [&](ld a) {
            ld s = -1;
            for (const auto& f : spec.maps) {
                s += std::pow(to_long_double(f.ratio), a);
            }
            return s;
        },
        1e-6L, 1);
}

void properties(Criterion& c, const std::string& name, const Loaded& p, bool osc)
{
    const ld a = p.model.alpha.mid_ld();
    if (osc) {
        c.near(a, moran(p.spec), 1e-12L, name + " Moran dimension");
    }
    // mass conservation and parent = sum of children
    for (int k = 0; k <= 8; ++k) {
        std::vector<TypedIsland> isl;
        try {
            isl = expand_frame(p.table, k, 20000);
        } catch (const FrameTooLarge&) {
            break;
        }
        if (isl.size() > 20000) {
            break;
        }
        ld total = 0;
        ld worst = 0;
        for (const auto& i : isl) {
            const ld m = p.model.island_measure(i.length, i.type).mid_ld();
            total += m;
            if (k <= 4) {
                ld kids = 0;
                for (const auto& ch : expand_children(p.table, i)) {
                    kids += p.model.island_measure(ch.length, ch.type).mid_ld();
                }
                worst = std::max(worst, std::fabs(kids - m));
            }
        }
        c.near(total, 1, 1e-10L, name + " mass k=" + std::to_string(k));
        if (k <= 4) {
            c.near(worst, 0, 1e-12L, name + " parent vs children k=" + std::to_string(k));
        }
    }
    // pruned search against the brute force scan
    SearchOptions o;
    o.constrained = false;
    o.exhaustive_limit = 0;
    for (int k = 0; k <= 12; ++k) {
        std::vector<TypedIsland> isl;
        try {
            isl = expand_frame(p.table, k, brute_force_endpoint_limit);
        } catch (const FrameTooLarge&) {
            break;
        }
        if (2 * isl.size() > brute_force_endpoint_limit) {
            break;
        }
        const CertifiedReal brute = brute_force_extremum(p.table, p.model, k, Sense::Max);
        const SearchResult s = search_field_max(p.table, p.model, k, o);
        c.near(s.value.mid_ld(), brute.mid_ld(), 1e-15L, name + " search vs brute k=" + std::to_string(k));
        c.expect(s.value.lo_ld() <= brute.hi_ld() && brute.lo_ld() <= s.value.hi_ld(),
                 name + " search and brute enclosures disjoint at k=" + std::to_string(k));
    }
}

void density_invariants(Criterion& c, const std::string& name, const Loaded& p, bool with_dmax)
{
    const ld a = p.model.alpha.mid_ld();
    const LowerBoundaries lower = lower_boundaries(p.ctx());
    const DminResult dmin = compute_dmin(p.ctx(), lower);
    const ld bound = std::pow(2.0L, -a) * std::min(lower.d0.value.mid_ld(), lower.d1.value.mid_ld());
    c.expect(dmin.d_min.mid_ld() <= bound + 1e-15L, name + " d_min above 2^-alpha min(D0, D1)");
    c.expect(dmin.d_min.mid_ld() <= 1 + 1e-15L, name + " d_min above 1");
    if (with_dmax) {
        const DmaxResult dmax = compute_dmax(p.ctx(), lower, 40, SearchOptions{});
        c.expect(dmax.d_max.mid_ld() >= 1 - 1e-15L, name + " d_max below 1");
    }
}

void criterion7()
{
    Criterion c{7, "property suites", {}, 0};
    const std::vector<std::string> names = {"cantor",      "three_ratios",  "third_quarter", "lambda_ninth",
                                            "touching_quarters", "sixteenths", "lambda_nested", "relaxed_sixths"};
    for (const auto& name : names) {
        try {
            const auto p = load(load_spec(config(name)));
            properties(c, name, *p, false);
            const bool a_holds = check_assumption_a(p->table, p->spec).holds;
            const bool a_expected = name != "lambda_nested";
            c.expect(a_holds == a_expected, name + " Assumption A verdict");
            if (a_holds) {
                // the touching example needs generation 81 for d_max
                density_invariants(c, name, *p, name != "touching_quarters");
            }
        } catch (const std::exception& e) {
            c.expect(false, name + ": " + e.what());
        }
    }
    {
        const auto p = load(load_spec(config("relaxed_sixths")));
        const BStatus b = check_assumption_b(p->spec, p->table);
        const Rational rho = frac(1, 6);
        c.expect(b.verdict == BVerdict::ViolationFound, "relaxed_sixths Assumption B verdict");
        c.expect(b.point && *b.point == rho * (1 - rho) / (1 + rho), "relaxed_sixths violation point");
    }
    std::mt19937 gen(7);
    for (int i = 0; i < 20; ++i) {
        const IFSSpec spec = random_osc(gen);
        std::ostringstream tag;
        tag << "osc#" << i << " [";
        for (const auto& f : spec.maps) {
            tag << " " << f.ratio << "x+" << f.offset;
        }
        tag << " ]";
        try {
            const auto p = load(spec);
            c.expect(p->table.confirmed && p->table.q() == 1, tag.str() + " single type");
            properties(c, tag.str(), *p, true);
            c.expect(check_assumption_a(p->table, p->spec).holds, tag.str() + " Assumption A");
            c.expect(check_assumption_b(p->spec, p->table).verdict == BVerdict::VerifiedToDepth,
                     tag.str() + " Assumption B");
            density_invariants(c, tag.str(), *p, true);
        } catch (const std::exception& e) {
            c.expect(false, tag.str() + ": " + e.what());
        }
    }
    report(c);
}

void criterion8()
{
    Criterion c{8, "determinism", {}, 0};
    for (const char* name : {"cantor", "lambda_ninth", "touching_quarters", "sixteenths"}) {
        cli("analyze " + config(name));
        cli("check " + config(name));
    }
    for (const auto& r : cli_log) {
        c.expect(r.identical, "output differs: " + r.args);
    }
    report(c);
}

} // namespace

int main()
{
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::cout << (failed_total == 0 ? "all criteria passed" : std::to_string(failed_total) + " criteria failed")
              << "\n";
    return failed_total == 0 ? 0 : 1;
}
