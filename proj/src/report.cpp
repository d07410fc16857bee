#include "gftc/report.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>

namespace gftc
{

using nlohmann::json;

const char* to_string(Command c)
{
    switch (c) {
    case Command::Analyze:
        return "analyze";
    case Command::Hausdorff:
        return "hausdorff";
    case Command::Packing:
        return "packing";
    case Command::Check:
        return "check";
    }
    return "?";
}

json certified_json(const CertifiedReal& v)
{
    return {{"lo", v.lo_string(25)}, {"hi", v.hi_string(25)}, {"mid", static_cast<double>(v.mid_ld())}};
}

json witness_json(const DensityWitness& w)
{
    json j;
    j["left"] = format_rational(w.left);
    j["right"] = format_rational(w.right);
    j["islands"] = json::array();
    for (const auto& [t, len] : w.islands) {
        j["islands"].push_back({{"type", t + 1}, {"length", format_rational(len)}});
    }
    j["value"] = certified_json(w.value);
    return j;
}

std::string decimal_string(const Rational& q, int digits)
{
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    const Rational scaled = abs(q) * scale + Rational(1, 2);
    BigInt n = scaled.get_num() / scaled.get_den();
    std::string s = n.get_str();
    if (static_cast<int>(s.size()) <= digits) {
        s.insert(0, static_cast<std::size_t>(digits + 1) - s.size(), '0');
    }
    if (digits > 0) {
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    }
    if (q < 0 && n != 0) {
        s.insert(0, "-");
    }
    return s;
}

namespace
{

class StageClock
{
public:
    explicit StageClock(json* sink) : sink_(sink) {}
    void mark(const std::string& stage)
    {
        const auto now = std::chrono::steady_clock::now();
        if (sink_ != nullptr) {
            (*sink_)[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
        }
        last_ = now;
    }

private:
    json* sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json spec_json(const IFSSpec& spec)
{
    json j;
    j["maps"] = json::array();
    for (const auto& m : spec.maps) {
        j["maps"].push_back({{"rho", format_rational(m.ratio)}, {"b", format_rational(m.offset)}});
    }
    j["scheme"] = to_string(spec.scheme);
    j["mode"] = to_string(spec.mode);
    j["alpha_tol"] = spec.tolerances.alpha_tol;
    j["dist_tol"] = spec.tolerances.dist_tol;
    j["input_order"] = spec.permutation;
    return j;
}

json map_json(const AffineMap& m)
{
    return {{"rho", format_rational(m.ratio)}, {"b", format_rational(m.offset)}};
}

json assumptions_json(const AssumptionReport& r)
{
    json a;
    a["status"] = r.a.holds ? "holds" : "violated";
    if (r.a.island) {
        a["island"] = {{"left", format_rational(r.a.island->left)},
                       {"right", format_rational(r.a.island->right)},
                       {"generation", r.a.island->generation}};
        a["outer"] = map_json(r.a.outer);
        a["inner"] = map_json(r.a.inner);
    }
    json b;
    b["status"] = to_string(r.b.verdict);
    b["depth"] = r.b.depth;
    b["budget_limited"] = r.b.budget_limited;
    b["residual_length"] = format_rational(r.b.residual);
    b["residuals"] = json::array();
    for (const auto& x : r.b.residuals) {
        b["residuals"].push_back(format_rational(x));
    }
    if (r.b.point) {
        b["point"] = format_rational(*r.b.point);
        b["preimage"] = format_rational(*r.b.preimage);
        b["edge_map"] = r.b.edge;
        b["generation"] = r.b.generation;
    }
    return {{"a", a}, {"b", b}};
}

json boundary_json(const BoundaryDensity& b)
{
    return {{"value", certified_json(b.value)}, {"witness", witness_json(b.witness)}, {"generation", b.generation}};
}

json lower_json(const LowerBoundaries& lo)
{
    json j;
    j["D0_under"] = boundary_json(lo.d0);
    j["D1_under"] = boundary_json(lo.d1);
    if (!lo.d0_per_type.empty()) {
        j["D0_under_per_type"] = json::array();
        j["D1_under_per_type"] = json::array();
        for (const auto& v : lo.d0_per_type) {
            j["D0_under_per_type"].push_back(certified_json(v));
        }
        for (const auto& v : lo.d1_per_type) {
            j["D1_under_per_type"].push_back(certified_json(v));
        }
    }
    j["min_D_under"] = certified_json(lo.kappa);
    return j;
}

bool may_be_le(const CertifiedReal& a, const CertifiedReal& b)
{
    return mpfr_lessequal_p(a.lo(), b.hi()) != 0;
}

// One pass at the current working precision. Fills `out`; throws on failure.
void run_numeric(Command cmd, const IFSSpec& spec, const TypeTable& table, const PipelineOptions& opt,
                 const AssumptionReport& assumptions, json& out, StageClock& clock)
{
    const IncidenceTemplate tmpl = incidence_template(table);
    const MeasureModel model = build_measure(table);
    clock.mark("measure");
    out["alpha"] = certified_json(model.alpha);
    out["full_dimension"] = model.full;
    out["perron"] = json::array();
    for (const auto& a : model.perron) {
        out["perron"].push_back(certified_json(a));
    }
    if (cmd == Command::Analyze || cmd == Command::Check) {
        return;
    }

    json& d = out["density"];
    d = json::object();
    if (model.full) {
        // K = [0,1]
        d["case_taken"] = to_string(MaxCase::FullInterval);
        if (cmd == Command::Hausdorff) {
            d["d_max"] = certified_json(CertifiedReal(1L));
            d["hausdorff"] = certified_json(CertifiedReal(1L));
        } else {
            d["d_min"] = certified_json(CertifiedReal(1L));
            d["packing"] = certified_json(CertifiedReal(1L));
        }
        return;
    }

    if (!assumptions.a.holds) {
        throw AssumptionViolated("Assumption A fails: a constitutive interval contains another");
    }
    if (spec.mode == Mode::Standard && assumptions.b.verdict != BVerdict::VerifiedToDepth) {
        if (!opt.assume_b) {
            throw AssumptionViolated(std::string("Assumption B is ") + to_string(assumptions.b.verdict) +
                                     "; use relaxed-b mode or --assume-b");
        }
        d["assume_b_override"] = true;
    }

    const DensityContext ctx{&spec, &table, &model};
    const LowerBoundaries lower = lower_boundaries(ctx);
    clock.mark("boundary");
    d["lower"] = lower_json(lower);

    if (cmd == Command::Hausdorff) {
        SearchOptions so;
        so.budget_seconds = opt.budget_seconds;
        so.workers = opt.workers;
        DmaxResult r = compute_dmax(ctx, lower, opt.max_generation, so);
        clock.mark("search");
        d["case_taken"] = to_string(r.case_taken);
        d["thresholds"] = {{"k", r.k}};
        if (r.k1) {
            d["thresholds"]["k1"] = *r.k1;
        }
        if (r.k2) {
            d["thresholds"]["k2"] = *r.k2;
        }
        if (r.n) {
            d["commensurability"] = {r.n->first, r.n->second};
        }
        if (r.case_taken != MaxCase::SeparatedLakes) {
            d["eta"] = format_rational(r.eta);
        }
        d["touching_pairs"] = r.touching;
        if (r.upper0) {
            d["D0_over"] = boundary_json(*r.upper0);
        }
        if (r.upper1) {
            d["D1_over"] = boundary_json(*r.upper1);
        }
        if (r.combined) {
            d["combined_edge_value"] = certified_json(*r.combined);
            d["combined_wins"] = r.combined_wins;
        }
        d["search"] = {{"generation", r.search.generation},
                       {"exhaustive", r.search.exhaustive},
                       {"candidates", r.search.candidates}};
        d["d_max"] = certified_json(r.d_max);
        d["witness"] = witness_json(r.witness);
        d["hausdorff"] = certified_json(CertifiedReal(1L) / r.d_max);
        d["invariants"] = {{"d_max_at_least_1", may_be_le(CertifiedReal(1L), r.d_max)}};
        if (opt.timings) {
            out["timings"]["search_pairs_visited"] = r.search.pairs_visited;
        }
    } else {
        DminResult r = compute_dmin(ctx, lower);
        clock.mark("packing");
        d["D"] = r.big_d_finite ? certified_json(r.big_d) : json(nullptr);
        if (r.big_d_witness) {
            d["D_witness"] = witness_json(*r.big_d_witness);
            d["D_midpoint"] = format_rational(r.big_d_midpoint);
        }
        d["attained_by"] = r.attained_by;
        d["d_min"] = certified_json(r.d_min);
        d["packing"] = certified_json(CertifiedReal(1L) / r.d_min);
        const CertifiedReal bound = pow_certified(Rational(1, 2), model.alpha) * lower.kappa;
        d["invariants"] = {{"d_min_at_most_1", may_be_le(r.d_min, CertifiedReal(1L))},
                           {"d_min_at_most_boundary_bound", may_be_le(r.d_min, bound)}};
    }
}

json table_json(const TypeTable& table)
{
    json j = json::parse(table_to_json(table));
    return j;
}

} // namespace

RunOutcome run_command(Command cmd, const IFSSpec& spec, const PipelineOptions& opt)
{
    RunOutcome res;
    json& rep = res.report;
    rep["schema"] = 1;
    rep["command"] = to_string(cmd);
    rep["spec"] = spec_json(spec);
    json timings;
    StageClock clock(opt.timings ? &timings : nullptr);

    auto fail = [&](int code, const std::string& msg, json detail = json::object()) {
        res.exit_code = code;
        rep["status"] = "error";
        rep["error"] = {{"code", code}, {"message", msg}};
        if (!detail.empty()) {
            rep["error"]["detail"] = detail;
        }
    };

    TypeTable table;
    try {
        table = classify_types(spec, opt.type_generations);
    } catch (const FrameTooLarge& e) {
        fail(exit_gftc_unconfirmed, e.what());
        return res;
    }
    clock.mark("types");
    rep["gftc"] = {{"confirmed", table.confirmed},
                   {"q", table.q()},
                   {"k0", table.k0},
                   {"generations_explored", table.generations_explored}};
    if (!table.confirmed) {
        fail(exit_gftc_unconfirmed, "no finite set of overlap types found within " +
                                        std::to_string(table.generations_explored) + " generations");
        if (opt.timings) {
            rep["timings"] = timings;
        }
        return res;
    }
    rep["types"] = table_json(table)["types"];
    const IncidenceTemplate tmpl = incidence_template(table);
    json jt = json::array();
    for (const auto& row : tmpl.entries) {
        json r = json::array();
        for (const auto& cell : row) {
            json c = json::array();
            for (const auto& x : cell) {
                c.push_back(format_rational(x));
            }
            r.push_back(c);
        }
        jt.push_back(r);
    }
    rep["incidence_template"] = jt;
    const bool irreducible = check_irreducible(tmpl);
    rep["irreducible"] = irreducible;
    if (!irreducible) {
        fail(exit_not_irreducible, "incidence matrix is not irreducible");
        return res;
    }

    AssumptionReport assumptions;
    assumptions.a = check_assumption_a(table, spec);
    assumptions.b = check_assumption_b(spec, table, opt.b_depth);
    clock.mark("assumptions");
    rep["assumptions"] = assumptions_json(assumptions);

    mpfr_prec_t bits = std::max<mpfr_prec_t>(opt.precision_bits, 32);
    json numeric;
    bool done = false;
    std::string last_undecided;
    while (!done) {
        numeric = json::object();
        try {
            PrecisionScope scope(bits);
            run_numeric(cmd, spec, table, opt, assumptions, numeric, clock);
            done = true;
        } catch (const UndecidableComparison& e) {
            last_undecided = e.what();
        } catch (const RootNotConverged& e) {
            last_undecided = e.what();
        } catch (const ThresholdInfeasible& e) {
            rep.update(numeric);
            rep["precision_bits"] = bits;
            fail(exit_threshold_infeasible, e.what(), {{"required_generation", e.required()}});
            if (opt.timings) {
                rep["timings"] = timings;
            }
            return res;
        } catch (const AssumptionViolated& e) {
            rep.update(numeric);
            rep["precision_bits"] = bits;
            fail(exit_assumption_failed, e.what());
            return res;
        } catch (const BudgetExhausted& e) {
            rep.update(numeric);
            rep["precision_bits"] = bits;
            fail(exit_budget_exhausted, e.what(),
                 {{"best_found_lower_bound", static_cast<double>(e.best_found())}, {"certified", false}});
            return res;
        } catch (const FrameTooLarge& e) {
            rep.update(numeric);
            rep["precision_bits"] = bits;
            fail(exit_budget_exhausted, e.what(), {{"reached", e.reached()}});
            return res;
        } catch (const NotIrreducible& e) {
            fail(exit_not_irreducible, e.what());
            return res;
        }
        if (!done) {
            if (bits >= max_precision_bits) {
                rep["precision_bits"] = bits;
                fail(exit_undecidable, "undecidable at " + std::to_string(bits) + " bits: " + last_undecided);
                return res;
            }
            bits = std::min<mpfr_prec_t>(bits * 2, max_precision_bits);
        }
    }
    rep.update(numeric);
    rep["precision_bits"] = bits;
    rep["status"] = "ok";
    if (cmd == Command::Check && (!assumptions.a.holds || assumptions.b.verdict != BVerdict::VerifiedToDepth)) {
        res.exit_code = exit_assumption_failed;
        rep["status"] = "assumptions_not_verified";
    }
    if (opt.timings) {
        if (rep.contains("timings")) {
            timings.update(rep["timings"]);
        }
        rep["timings"] = timings;
    }
    return res;
}

RunOutcome run_command_file(Command cmd, const std::string& path, const PipelineOptions& opt)
{
    IFSSpec spec;
    try {
        spec = load_spec(path);
    } catch (const std::exception& e) {
        RunOutcome res;
        res.exit_code = exit_invalid_config;
        res.report["schema"] = 1;
        res.report["command"] = to_string(cmd);
        res.report["status"] = "error";
        res.report["error"] = {{"code", exit_invalid_config}, {"message", e.what()}};
        return res;
    }
    return run_command(cmd, spec, opt);
}

namespace
{

std::string approx(const json& c, int digits = 10)
{
    std::ostringstream os;
    os << std::setprecision(digits) << c.at("mid").get<double>();
    return os.str();
}

} // namespace

std::string report_to_text(const json& r)
{
    std::ostringstream os;
    os << "command: " << r.value("command", "?") << "\n";
    if (r.contains("spec")) {
        os << "maps:";
        for (const auto& m : r["spec"]["maps"]) {
            os << " " << m["rho"].get<std::string>() << "x+" << m["b"].get<std::string>();
        }
        os << "  (" << r["spec"]["scheme"].get<std::string>() << ", " << r["spec"]["mode"].get<std::string>()
           << ")\n";
    }
    if (r.contains("gftc")) {
        os << "gftc: confirmed=" << r["gftc"]["confirmed"] << " q=" << r["gftc"]["q"] << " k0=" << r["gftc"]["k0"]
           << "\n";
    }
    if (r.contains("irreducible")) {
        os << "irreducible: " << r["irreducible"] << "\n";
    }
    if (r.contains("alpha")) {
        os << "alpha: " << approx(r["alpha"], 12) << "  [" << r["alpha"]["lo"].get<std::string>() << ", "
           << r["alpha"]["hi"].get<std::string>() << "]\n";
    }
    if (r.contains("assumptions")) {
        const auto& a = r["assumptions"];
        os << "assumption A: " << a["a"]["status"].get<std::string>() << "\n";
        os << "assumption B: " << a["b"]["status"].get<std::string>() << " (depth " << a["b"]["depth"] << ")";
        if (a["b"].contains("point")) {
            os << " point " << a["b"]["point"].get<std::string>();
        }
        os << "\n";
    }
    if (r.contains("density")) {
        const auto& d = r["density"];
        if (d.contains("lower")) {
            os << "D0_under: " << approx(d["lower"]["D0_under"]["value"]) << "\n";
            os << "D1_under: " << approx(d["lower"]["D1_under"]["value"]) << "\n";
        }
        if (d.contains("case_taken")) {
            os << "case: " << d["case_taken"].get<std::string>() << "\n";
        }
        if (d.contains("thresholds")) {
            os << "threshold k: " << d["thresholds"]["k"] << "\n";
        }
        if (d.contains("d_max")) {
            os << "d_max: " << approx(d["d_max"]) << "\n";
            if (d.contains("witness")) {
                os << "witness: [" << d["witness"]["left"].get<std::string>() << ", "
                   << d["witness"]["right"].get<std::string>() << "]\n";
            }
            os << "hausdorff: " << approx(d["hausdorff"]) << "\n";
        }
        if (d.contains("d_min")) {
            if (d.contains("D") && !d["D"].is_null()) {
                os << "D: " << approx(d["D"]) << "\n";
            }
            os << "d_min: " << approx(d["d_min"]) << "\n";
            os << "packing: " << approx(d["packing"]) << "\n";
        }
    }
    if (r.contains("error")) {
        os << "error (" << r["error"]["code"] << "): " << r["error"]["message"].get<std::string>() << "\n";
        if (r["error"].contains("detail")) {
            os << "  " << r["error"]["detail"].dump() << "\n";
        }
    }
    if (r.contains("timings")) {
        os << "timings (ms): " << r["timings"].dump() << "\n";
    }
    return os.str();
}

std::string render_svg(const IFSSpec& spec, const TypeTable& table, int levels, std::size_t cap)
{
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const Rational width(1000);
    const int row = 28;
    const int bar = 16;
    const int left_pad = 60;
    const std::size_t q = table.confirmed ? table.q() : 0;
    const int legend_rows = static_cast<int>(q) + 1;
    const int height = 20 + (levels + 1) * row + 20 + legend_rows * 20;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << left_pad + 1000 + 20
       << "\" height=\"" << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int k = 0; k <= levels; ++k) {
        struct Bar {
            Rational left, right;
            int type;
        };
        std::vector<Bar> bars;
        if (table.confirmed) {
            for (const auto& t : expand_frame(table, k, cap)) {
                bars.push_back({t.left, t.right(), t.type});
            }
        } else {
            for (const auto& i : build_frame(spec, k, cap).islands) {
                bars.push_back({i.left, i.right, -1});
            }
        }
        const int y = 20 + k * row;
        os << "<text x=\"4\" y=\"" << y + bar - 3 << "\" font-family=\"monospace\" font-size=\"12\">k=" << k
           << "</text>\n";
        os << "<g transform=\"translate(" << left_pad << "," << y << ")\">\n";
        for (const auto& b : bars) {
            const char* fill = b.type < 0 ? "#999999" : palette[b.type % 10];
            os << "<rect x=\"" << decimal_string(b.left * width, 12) << "\" y=\"0\" width=\""
               << decimal_string((b.right - b.left) * width, 12) << "\" height=\"" << bar << "\" fill=\"" << fill
               << "\"/>\n";
        }
        os << "</g>\n";
    }
    int y = 20 + (levels + 1) * row + 10;
    os << "<text x=\"4\" y=\"" << y << "\" font-family=\"monospace\" font-size=\"12\">overlap types</text>\n";
    for (std::size_t t = 0; t < q; ++t) {
        y += 20;
        os << "<rect x=\"" << left_pad << "\" y=\"" << y - 12 << "\" width=\"14\" height=\"14\" fill=\""
           << palette[t % 10] << "\"/>\n";
        os << "<text x=\"" << left_pad + 20 << "\" y=\"" << y
           << "\" font-family=\"monospace\" font-size=\"12\">T" << t + 1 << " first at generation "
           << table.types[t].first_generation << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace gftc
