#include "helpers.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sys/wait.h>

using namespace gftc;

namespace
{

struct Proc {
    int code = -1;
    std::string out;
};

Proc run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + GFTC_CLI_PATH + " " + args + " 2>/dev/null";
    Proc p;
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
    p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return p;
}

PipelineOptions quick()
{
    PipelineOptions o;
    o.budget_seconds = 120;
    return o;
}

} // namespace

TEST(DecimalString, Rounding)
{
    EXPECT_EQ(decimal_string(make_rational(1, 3), 4), "0.3333");
    EXPECT_EQ(decimal_string(make_rational(2, 3), 4), "0.6667");
    EXPECT_EQ(decimal_string(Rational(125), 2), "125.00");
    EXPECT_EQ(decimal_string(make_rational(-1, 8), 2), "-0.13");
    EXPECT_EQ(decimal_string(make_rational(1, 1000), 2), "0.00");
    EXPECT_EQ(decimal_string(make_rational(7, 2), 0), "4");
}

TEST(RenderSvg, RectanglesMatchIslandEndpoints)
{
    const auto p = test::load("sixteenths");
    const int levels = 3;
    const std::string svg = render_svg(p->spec, p->table, levels);
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t opened = 0;
    for (std::size_t at = svg.find("<g "); at != std::string::npos; at = svg.find("<g ", at + 1)) {
        ++opened;
    }
    std::size_t closed = 0;
    for (std::size_t at = svg.find("</g>"); at != std::string::npos; at = svg.find("</g>", at + 1)) {
        ++closed;
    }
    EXPECT_EQ(opened, static_cast<std::size_t>(levels + 1));
    EXPECT_EQ(opened, closed);

    std::set<std::string> xs;
    const std::regex rx("<rect x=\"([0-9.]+)\" y=\"0\" width=\"([0-9.]+)\"");
    for (std::sregex_iterator it(svg.begin(), svg.end(), rx), end; it != end; ++it) {
        xs.insert((*it)[1].str());
    }
    for (int k = 0; k <= levels; ++k) {
        for (const auto& i : expand_frame(p->table, k)) {
            EXPECT_TRUE(xs.count(decimal_string(i.left * Rational(1000), 12))) << "k=" << k;
        }
    }
    EXPECT_NE(svg.find("T1 first at generation 0"), std::string::npos);
    EXPECT_NE(svg.find("T2 first at generation 1"), std::string::npos);
}

TEST(RunCommand, InvalidConfigFile)
{
    const auto r = run_command_file(Command::Analyze, test::config("does_not_exist"), quick());
    EXPECT_EQ(r.exit_code, exit_invalid_config);
    EXPECT_EQ(r.report["error"]["code"], exit_invalid_config);
}

TEST(RunCommand, GftcNotConfirmed)
{
    const auto r = run_command_file(Command::Analyze, test::config("not_finite_type"), quick());
    EXPECT_EQ(r.exit_code, exit_gftc_unconfirmed);
}

TEST(RunCommand, NotIrreducible)
{
    const auto r = run_command_file(Command::Analyze, test::config("reducible"), quick());
    EXPECT_EQ(r.exit_code, exit_not_irreducible);
}

TEST(RunCommand, ThresholdInfeasible)
{
    const auto r = run_command_file(Command::Hausdorff, test::config("touching_quarters"), quick());
    EXPECT_EQ(r.exit_code, exit_threshold_infeasible);
    EXPECT_EQ(r.report["error"]["detail"]["required_generation"], 81);
}

TEST(RunCommand, AssumptionAFails)
{
    const auto r = run_command_file(Command::Hausdorff, test::config("lambda_nested"), quick());
    EXPECT_EQ(r.exit_code, exit_assumption_failed);
    const auto c = run_command_file(Command::Check, test::config("lambda_nested"), quick());
    EXPECT_EQ(c.exit_code, exit_assumption_failed);
}

TEST(RunCommand, AssumptionBNeededInStandardMode)
{
    // the relaxed example, read as a standard mode spec
    IFSSpec spec = load_spec(test::config("relaxed_sixths"));
    spec.mode = Mode::Standard;
    const auto r = run_command(Command::Hausdorff, spec, quick());
    EXPECT_EQ(r.exit_code, exit_assumption_failed);
    PipelineOptions o = quick();
    o.assume_b = true;
    const auto forced = run_command(Command::Hausdorff, spec, o);
    EXPECT_EQ(forced.exit_code, exit_ok);
    EXPECT_TRUE(forced.report["density"]["assume_b_override"].get<bool>());
}

TEST(RunCommand, FullDimensionShortCircuit)
{
    const IFSSpec spec = make_spec({test::map(1, 2, 0, 1), test::map(1, 3, 1, 3), test::map(1, 3, 2, 3)});
    const auto r = run_command(Command::Packing, spec, quick());
    ASSERT_EQ(r.exit_code, exit_ok);
    EXPECT_TRUE(r.report["full_dimension"].get<bool>());
    EXPECT_EQ(r.report["density"]["packing"]["mid"], 1.0);
}

TEST(RunCommand, TypeIdsAreOneBased)
{
    const auto r = run_command_file(Command::Analyze, test::config("sixteenths"), quick());
    ASSERT_EQ(r.exit_code, exit_ok);
    EXPECT_EQ(r.report["types"][0]["id"], 1);
    EXPECT_EQ(r.report["schema"], 1);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run("").code, exit_usage);
    EXPECT_EQ(run("frobnicate x.json").code, exit_usage);
    EXPECT_EQ(run("analyze " + test::config("cantor") + " --precision-bits 4").code, exit_usage);
}

TEST(Cli, ExitCodesFromBinary)
{
    EXPECT_EQ(run("analyze " + test::config("cantor")).code, exit_ok);
    EXPECT_EQ(run("analyze /nonexistent.json").code, exit_invalid_config);
    EXPECT_EQ(run("analyze " + test::config("not_finite_type")).code, exit_gftc_unconfirmed);
    EXPECT_EQ(run("analyze " + test::config("reducible")).code, exit_not_irreducible);
    EXPECT_EQ(run("hausdorff " + test::config("touching_quarters")).code, exit_threshold_infeasible);
    EXPECT_EQ(run("check " + test::config("lambda_nested")).code, exit_assumption_failed);
}

TEST(Cli, ReportsAreByteIdentical)
{
    for (const char* cmd : {"hausdorff", "packing"}) {
        const std::string args = std::string(cmd) + " " + test::config("sixteenths");
        const Proc a = run(args, "GFTC_WORKERS=1");
        const Proc b = run(args, "GFTC_WORKERS=1");
        const Proc c = run(args, "GFTC_WORKERS=4");
        ASSERT_EQ(a.code, exit_ok);
        EXPECT_EQ(a.out, b.out);
        EXPECT_EQ(a.out, c.out);
        const auto j = nlohmann::json::parse(a.out);
        EXPECT_FALSE(j.contains("timings"));
    }
}

TEST(Cli, TextOutput)
{
    const Proc p = run("hausdorff --text " + test::config("sixteenths"));
    ASSERT_EQ(p.code, exit_ok);
    EXPECT_NE(p.out.find("0.7775350"), std::string::npos);
}
