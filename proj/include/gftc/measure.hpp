#ifndef GFTC_MEASURE_HPP
#define GFTC_MEASURE_HPP

#include "gftc/certified_real.hpp"
#include "gftc/typing.hpp"

#include <stdexcept>
#include <vector>

namespace gftc
{

class NotIrreducible : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using IntervalMatrix = std::vector<std::vector<CertifiedReal>>;

// A_s with entries sum r^s.
IntervalMatrix evaluate_template(const IncidenceTemplate& tmpl, const CertifiedReal& s);

// Enclosure of the spectral radius of a nonnegative irreducible matrix from
// Collatz-Wielandt bounds on an approximate Perron vector.
CertifiedReal spectral_radius(const IntervalMatrix& a);

// Enclosure of alpha with r(A_alpha) = 1. Width about 2^-(precision/2).
CertifiedReal solve_dimension(const IncidenceTemplate& tmpl);

// True when every row of A_1 sums to 1 exactly, i.e. alpha = 1 and K = [0,1].
bool full_dimension(const IncidenceTemplate& tmpl);

// Perron vector of A_alpha normalised by a_1 = 1.
std::vector<CertifiedReal> principal_vector(const IncidenceTemplate& tmpl, const CertifiedReal& alpha);

struct MeasureModel {
    CertifiedReal alpha;
    std::vector<CertifiedReal> perron;
    IncidenceTemplate tmpl;
    bool full = false; // alpha == 1

    // lambda(I) = |I|^alpha a_type
    CertifiedReal island_measure(const Rational& length, int type) const;
    CertifiedReal power(const Rational& length) const;
};

MeasureModel build_measure(const TypeTable& table);

CertifiedReal island_measure(const MeasureModel& model, const Island& island);

// Typed islands of one generation with prefix sums of their measures.
struct MeasuredFrame {
    int k = 0;
    std::vector<TypedIsland> islands;
    std::vector<CertifiedReal> prefix; // prefix[i] = lambda of islands 0..i-1
};

MeasuredFrame measured_frame(const TypeTable& table, const MeasureModel& model, int k,
                             std::size_t cap = default_vertex_cap);

// lambda([x, y]) for island endpoints x < y of the frame.
CertifiedReal interval_measure(const MeasuredFrame& frame, const Rational& x, const Rational& y);

} // namespace gftc

#endif
