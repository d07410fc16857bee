#ifndef GFTC_IFS_HPP
#define GFTC_IFS_HPP

#include "gftc/rational.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gftc
{

class SpecError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// x -> ratio * x + offset
struct AffineMap {
    Rational ratio{1};
    Rational offset{0};

    static AffineMap identity() { return {Rational(1), Rational(0)}; }

    Rational apply(const Rational& x) const { return ratio * x + offset; }
    Rational left() const { return offset; }
    Rational right() const { return offset + ratio; }

    // (*this) o inner
    AffineMap compose(const AffineMap& inner) const
    {
        return {ratio * inner.ratio, ratio * inner.offset + offset};
    }
    AffineMap inverse() const { return {1 / ratio, -offset / ratio}; }

    friend bool operator==(const AffineMap& a, const AffineMap& b)
    {
        return a.ratio == b.ratio && a.offset == b.offset;
    }
    friend bool operator!=(const AffineMap& a, const AffineMap& b) { return !(a == b); }
};

// Orders maps by image: left endpoint, then right endpoint.
bool image_less(const AffineMap& a, const AffineMap& b);

// Symbols are 0-based internally; printed 1-based.
using Word = std::vector<std::uint16_t>;

std::string format_word(const Word& w);

enum class Scheme
{
    Sigma,
    Lambda
};

enum class Mode
{
    Standard,
    RelaxedB
};

struct Tolerances {
    double alpha_tol = 1e-12;
    double dist_tol = 1e-15;
};

struct IFSSpec {
    std::vector<AffineMap> maps;
    Scheme scheme = Scheme::Sigma;
    Mode mode = Mode::Standard;
    Tolerances tolerances;
    // permutation[i] is the position of sorted map i in the input document
    std::vector<int> permutation;

    std::size_t size() const { return maps.size(); }
    const AffineMap& first() const { return maps.front(); }
    const AffineMap& last() const { return maps.back(); }
    Rational min_ratio() const;
};

// Checks the invariants and sorts the maps by image. Throws SpecError.
IFSSpec make_spec(std::vector<AffineMap> maps, Scheme scheme = Scheme::Sigma, Mode mode = Mode::Standard,
                  Tolerances tol = {});

IFSSpec parse_spec(const std::string& text);
IFSSpec load_spec(const std::string& path);
std::string spec_to_json(const IFSSpec& spec);

AffineMap compose_word(const IFSSpec& spec, const Word& w);

const char* to_string(Scheme s);
const char* to_string(Mode m);

} // namespace gftc

#endif
