#ifndef GFTC_VERIFY_HPP
#define GFTC_VERIFY_HPP

#include "gftc/density.hpp"

#include <optional>
#include <string>

namespace gftc
{

struct AStatus {
    bool holds = true;
    // first offending island and the pair (u contains v), when violated
    std::optional<Island> island;
    AffineMap outer;
    AffineMap inner;
};

enum class BVerdict
{
    VerifiedToDepth,
    ViolationFound,
    Inconclusive
};
const char* to_string(BVerdict v);

struct BStatus {
    BVerdict verdict = BVerdict::Inconclusive;
    int depth = 0;
    Rational residual;                // last residual length (both edges)
    std::vector<Rational> residuals;  // per generation 1..depth
    std::optional<Rational> point;    // ViolationFound: point of S_e([0,1]) cap K outside S_e K
    std::optional<Rational> preimage; // S_e^{-1}(point), a point of a lake
    int edge = 0;                     // 1 for S_1, m for S_m
    int generation = 0;               // generation of the vertex producing `point`
    bool budget_limited = false;      // stopped below the requested depth by the vertex cap
};

struct AssumptionReport {
    AStatus a;
    BStatus b;
};

constexpr int default_b_depth = 8;

// Exact: every island state (all normalised islands of all generations).
AStatus check_assumption_a(const TypeTable& table, const IFSSpec& spec);

BStatus check_assumption_b(const IFSSpec& spec, const TypeTable& table, int depth = default_b_depth,
                           std::size_t cap = 100'000);

// Plain scan over all field intervals of generation k (no pruning). Max: all
// intervals. Min: intervals whose midpoint lies in an island of generation k.
constexpr std::size_t brute_force_endpoint_limit = 5000;
CertifiedReal brute_force_extremum(const TypeTable& table, const MeasureModel& model, int k, Sense sense);

} // namespace gftc

#endif
