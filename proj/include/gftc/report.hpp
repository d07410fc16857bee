#ifndef GFTC_REPORT_HPP
#define GFTC_REPORT_HPP

#include "gftc/verify.hpp"

#include <json.hpp>

#include <string>

namespace gftc
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_invalid_config = 2,
    exit_gftc_unconfirmed = 3,
    exit_not_irreducible = 4,
    exit_threshold_infeasible = 5,
    exit_assumption_failed = 6,
    exit_budget_exhausted = 7,
    exit_undecidable = 8
};

enum class Command
{
    Analyze,
    Hausdorff,
    Packing,
    Check
};
const char* to_string(Command c);

struct PipelineOptions {
    int max_generation = 40;
    double budget_seconds = 300;
    bool assume_b = false;
    mpfr_prec_t precision_bits = default_precision_bits;
    int workers = 1;
    bool timings = false;
    int b_depth = default_b_depth;
    int type_generations = default_max_generations;
};

struct RunOutcome {
    int exit_code = exit_ok;
    nlohmann::json report;
};

RunOutcome run_command(Command cmd, const IFSSpec& spec, const PipelineOptions& opt);

// Reads and parses the config; a parse failure yields exit 2 with an error report.
RunOutcome run_command_file(Command cmd, const std::string& path, const PipelineOptions& opt);

std::string report_to_text(const nlohmann::json& report);

nlohmann::json certified_json(const CertifiedReal& v);
nlohmann::json witness_json(const DensityWitness& w);

// Fixed point decimal with `digits` fractional digits, rounded to nearest.
std::string decimal_string(const Rational& q, int digits);

// One row per generation 0..levels, islands coloured by type.
std::string render_svg(const IFSSpec& spec, const TypeTable& table, int levels, std::size_t cap = 200'000);

} // namespace gftc

#endif
