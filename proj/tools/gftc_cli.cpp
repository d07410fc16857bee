#include "gftc/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace gftc;

namespace
{

int env_workers()
{
    const char* s = std::getenv("GFTC_WORKERS");
    if (s == nullptr || *s == '\0') {
        return 1;
    }
    try {
        return std::max(1, std::stoi(s));
    } catch (const std::exception&) {
        return 1;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hausdorff and packing measures of self-similar sets under the generalized finite type condition"};
    app.require_subcommand(1);

    PipelineOptions opt;
    opt.workers = env_workers();
    std::string config;
    bool text = false;
    bool json_out = false;
    int precision = static_cast<int>(default_precision_bits);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "config file (JSON)")->required();
        sub->add_flag("--text", text, "human readable output");
        sub->add_flag("--json", json_out, "JSON report (default)");
        sub->add_option("--precision-bits", precision, "starting working precision in bits")
            ->check(CLI::Range(32, 1024));
        sub->add_flag("--timings", opt.timings, "add wall clock timings (breaks byte identical output)");
    };
    auto add_density = [&](CLI::App* sub) {
        sub->add_option("--max-generation", opt.max_generation, "highest generation the search may use")
            ->check(CLI::PositiveNumber);
        sub->add_option("--budget", opt.budget_seconds, "search wall time limit in seconds")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--assume-b", opt.assume_b, "proceed when Assumption B is not verified");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "types, incidence matrix, dimension, assumptions");
    add_common(analyze);
    CLI::App* hausdorff = app.add_subcommand("hausdorff", "maximal density and Hausdorff measure");
    add_common(hausdorff);
    add_density(hausdorff);
    CLI::App* packing = app.add_subcommand("packing", "minimal centred density and packing measure");
    add_common(packing);
    add_density(packing);
    CLI::App* check = app.add_subcommand("check", "Assumptions A and B");
    add_common(check);
    check->add_option("--depth", opt.b_depth, "generations used for Assumption B")->check(CLI::Range(1, 30));

    CLI::App* render = app.add_subcommand("render", "SVG diagram of the first levels of islands");
    int levels = 5;
    std::string out_path;
    render->add_option("config", config, "config file (JSON)")->required();
    render->add_option("--levels", levels, "number of generations below the root")->check(CLI::Range(0, 40));
    render->add_option("-o,--out", out_path, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }
    opt.precision_bits = precision;

    if (render->parsed()) {
        IFSSpec spec;
        try {
            spec = load_spec(config);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_invalid_config;
        }
        const TypeTable table = classify_types(spec);
        std::string svg;
        try {
            svg = render_svg(spec, table, levels);
        } catch (const FrameTooLarge& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_budget_exhausted;
        }
        if (out_path.empty()) {
            std::cout << svg;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "error: cannot write '" << out_path << "'\n";
                return exit_usage;
            }
            out << svg;
        }
        return table.confirmed ? exit_ok : exit_gftc_unconfirmed;
    }

    Command cmd = Command::Analyze;
    if (hausdorff->parsed()) {
        cmd = Command::Hausdorff;
    } else if (packing->parsed()) {
        cmd = Command::Packing;
    } else if (check->parsed()) {
        cmd = Command::Check;
    }
    const RunOutcome res = run_command_file(cmd, config, opt);
    if (text && !json_out) {
        std::cout << report_to_text(res.report);
    } else {
        std::cout << res.report.dump(2) << "\n";
    }
    if (res.exit_code != exit_ok && res.report.contains("error")) {
        std::cerr << "error: " << res.report["error"]["message"].get<std::string>() << "\n";
    }
    return res.exit_code;
}
