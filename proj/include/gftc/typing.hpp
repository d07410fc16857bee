#ifndef GFTC_TYPING_HPP
#define GFTC_TYPING_HPP

#include "gftc/generation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gftc
{

// A vertex map seen from its island [c, d]: x -> ratio*x + offset after
// the change of variables sending [c, d] to [0, 1]. `residual` is
// rho_v / rho_min^k and is only meaningful for the Lambda scheme.
struct NormalizedVertex {
    Rational offset;
    Rational ratio;
    Rational residual;
};

struct StateChild {
    int state = -1;
    Rational offset; // (child.left - parent.left) / |parent|
    Rational ratio;  // |child| / |parent|
};

// Islands with identical normalized vertex data have identical offspring,
// so they are explored once. Several states may share one overlap type.
struct IslandState {
    std::vector<NormalizedVertex> signature;
    std::string key;
    std::string shape_key; // ignores residuals
    int first_generation = 0;
    Island representative;
    std::vector<StateChild> children;
    int type = -1;
};

struct ChildDescriptor {
    int type = -1;
    Rational offset;
    Rational ratio;
};

struct OverlapType {
    int id = 0;
    int representative_state = 0;
    int first_generation = 0;
    std::vector<int> states;
    std::vector<ChildDescriptor> children; // left to right
};

struct TypeTable {
    Scheme scheme = Scheme::Sigma;
    bool confirmed = false;
    int k0 = 0;
    int generations_explored = 0;
    std::vector<IslandState> states;
    std::vector<OverlapType> types;

    std::size_t q() const { return types.size(); }
    const Island& representative(int type) const { return states[types[type].representative_state].representative; }
};

struct IncidenceTemplate {
    std::size_t q = 0;
    // entries[i][j]: length ratios r of type-j children of a type-i island
    std::vector<std::vector<std::vector<Rational>>> entries;
};

constexpr int default_max_generations = 12;
constexpr std::size_t default_max_states = 20000;

TypeTable classify_types(const IFSSpec& spec, int max_generations = default_max_generations,
                         std::size_t max_states = default_max_states);

IncidenceTemplate incidence_template(const TypeTable& table);
bool check_irreducible(const IncidenceTemplate& tmpl);

// Offspring (generation k+1 islands) of a concrete generation-k island.
std::vector<Island> island_offspring(const IFSSpec& spec, const Island& island);

std::vector<NormalizedVertex> normalize_island(const IFSSpec& spec, const Island& island);

// Islands generated from the type tree. Endpoints are exact.
struct TypedIsland {
    Rational left;
    Rational length;
    int type = 0;

    Rational right() const { return left + length; }
};

std::vector<TypedIsland> expand_frame(const TypeTable& table, int k, std::size_t cap = default_vertex_cap);
std::vector<TypedIsland> expand_children(const TypeTable& table, const TypedIsland& parent);

// Frame statistics of generation k computed by recursion over types; works
// for generations far beyond anything that can be expanded.
struct GenerationProfile {
    int k = 0;
    Rational beta_first;
    Rational beta_last;
    Rational beta_min;
    Rational beta_max;
    std::optional<Rational> gamma_min;     // empty when there is a single island
    std::optional<Rational> gamma_min_pos; // empty when every gap is zero
    BigInt island_count;
};

GenerationProfile generation_profile(const TypeTable& table, int k);

// Calls `visit` with the profiles of generations 0, 1, ..., kmax in order;
// stops early when `visit` returns false.
void for_each_profile(const TypeTable& table, int kmax, const std::function<bool(const GenerationProfile&)>& visit);

std::string table_to_json(const TypeTable& table);

} // namespace gftc

#endif
