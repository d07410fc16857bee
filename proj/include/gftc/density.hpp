#ifndef GFTC_DENSITY_HPP
#define GFTC_DENSITY_HPP

#include "gftc/measure.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gftc
{

class ThresholdInfeasible : public std::runtime_error
{
public:
    ThresholdInfeasible(const std::string& what, int required) : std::runtime_error(what), required_(required) {}
    int required() const { return required_; }

private:
    int required_;
};

class BudgetExhausted : public std::runtime_error
{
public:
    BudgetExhausted(const std::string& what, long double best) : std::runtime_error(what), best_(best) {}
    long double best_found() const { return best_; }

private:
    long double best_;
};

// lambda(J) = sum over `islands` of |I|^alpha a_type; the list is the
// decomposition of J into maximal islands of the type tree.
struct DensityWitness {
    Rational left;
    Rational right;
    std::vector<std::pair<int, Rational>> islands; // (type, length)
    CertifiedReal value;
};

CertifiedReal witness_density(const MeasureModel& model, const DensityWitness& w);

// Maximal islands of generation <= k inside [x, y]; x and y must be island
// endpoints of generation k.
std::vector<TypedIsland> decompose_interval(const TypeTable& table, const Rational& x, const Rational& y, int k);
DensityWitness make_witness(const TypeTable& table, const MeasureModel& model, const Rational& x, const Rational& y,
                            int k);

enum class Side
{
    Left,
    Right
};
enum class Sense
{
    Min,
    Max
};

struct BoundaryDensity {
    CertifiedReal value;
    DensityWitness witness;
    int generation = 0;
};

// Extremum of d([0,x]) (Left) or d([y,1]) (Right) over field intervals of
// the given generation, measured inside an island of type `type`
// (0 = the whole unit interval).
BoundaryDensity boundary_extremum(const TypeTable& table, const MeasureModel& model, Side side, Sense sense,
                                  int generation, int type = 0);

// Smallest k with beta_first^(k) <= rho_1 (Left) or beta_last^(k) <= rho_m.
int lower_boundary_generation(const TypeTable& table, const IFSSpec& spec, Side side, int cap = 4000);
// Relative depth below a type-t island with edge island ratio <= rho.
int lower_boundary_depth(const TypeTable& table, int type, Side side, const Rational& rho, int cap = 4000);

// Smallest k >= from with beta_max^(k) <= x^(1/(1-alpha)) (times `factor`
// on the left hand side).
int threshold_generation(const TypeTable& table, const MeasureModel& model, const CertifiedReal& x,
                         const Rational& factor, int from, int cap = 4000);

struct EdgeAnchor {
    Rational v0_ratio; // |S_v0([0,1])| / |I|
    Rational v1_ratio;
    int i0 = 0;
    int i1 = 0;
};

struct EdgeAnchors {
    std::vector<EdgeAnchor> per_type;
    Rational eta1;
    Rational eta2;
    Rational eta;
};

class AssumptionViolated : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

EdgeAnchors edge_anchors(const TypeTable& table, const IFSSpec& spec);

// Minimal (n1, nm) with rho1^n1 = rhom^nm, or nothing if non-arithmetic.
std::optional<std::pair<long, long>> commensurability(const Rational& rho1, const Rational& rhom);

// Enclosure of dist(x, K) with width <= eps (0 when x is a point of K
// reached exactly, exact when x lies in a lake).
CertifiedReal dist_to_attractor(const TypeTable& table, const Rational& x, const Rational& eps);

struct SearchOptions {
    double budget_seconds = 300;
    int workers = 1;
    std::size_t exhaustive_limit = 2000; // endpoints
    bool constrained = true;              // skip intervals inside one generation k0+1 island
};

struct SearchResult {
    CertifiedReal value;
    DensityWitness witness;
    int generation = 0;
    std::size_t candidates = 0;
    std::size_t pairs_visited = 0;
    bool exhaustive = false;
};

// Certified max of d over field intervals of generation k.
SearchResult search_field_max(const TypeTable& table, const MeasureModel& model, int k, const SearchOptions& opt,
                              long double incumbent = 0);

enum class MaxCase
{
    SeparatedLakes,
    TouchingArithmetic,
    TouchingNonArithmetic,
    FullInterval
};
const char* to_string(MaxCase c);

struct DensityContext {
    const IFSSpec* spec = nullptr;
    const TypeTable* table = nullptr;
    const MeasureModel* model = nullptr;
};

struct LowerBoundaries {
    BoundaryDensity d0;
    BoundaryDensity d1;
    // relaxed mode only: per type values (index = type)
    std::vector<CertifiedReal> d0_per_type;
    std::vector<CertifiedReal> d1_per_type;
    CertifiedReal kappa; // min(D0, D1)
};

LowerBoundaries lower_boundaries(const DensityContext& ctx);

struct DmaxResult {
    MaxCase case_taken = MaxCase::SeparatedLakes;
    int k = 0;
    std::optional<int> k1;
    std::optional<int> k2;
    std::optional<std::pair<long, long>> n;
    Rational eta;
    CertifiedReal d_max;
    DensityWitness witness;
    std::optional<BoundaryDensity> upper0; // D0 bar
    std::optional<BoundaryDensity> upper1; // D1 bar
    std::optional<CertifiedReal> combined;
    bool combined_wins = false;
    std::vector<std::size_t> touching; // generation k0+1 touching pairs (left index)
    SearchResult search;
};

DmaxResult compute_dmax(const DensityContext& ctx, const LowerBoundaries& lower, int max_generation,
                        const SearchOptions& opt);

struct DminResult {
    CertifiedReal d_min;
    CertifiedReal big_d;                 // the constant D (empty pair set: +inf, flagged)
    bool big_d_finite = false;
    std::optional<DensityWitness> big_d_witness; // numerator islands and the centred interval
    Rational big_d_midpoint;
    std::string attained_by;              // "D0", "D1" or "D"
};

DminResult compute_dmin(const DensityContext& ctx, const LowerBoundaries& lower);

} // namespace gftc

#endif
