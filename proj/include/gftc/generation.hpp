#ifndef GFTC_GENERATION_HPP
#define GFTC_GENERATION_HPP

#include "gftc/ifs.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gftc
{

class FrameTooLarge : public std::runtime_error
{
public:
    FrameTooLarge(const std::string& what, std::size_t reached) : std::runtime_error(what), reached_(reached) {}
    std::size_t reached() const { return reached_; }

private:
    std::size_t reached_;
};

constexpr std::size_t default_vertex_cap = 10'000'000;

struct Vertex {
    AffineMap map;
    Word word; // one word producing the map
};

struct Island {
    Rational left;
    Rational right;
    std::vector<AffineMap> vertices; // sorted by image
    int generation = 0;
    int type_id = -1;

    Rational length() const { return right - left; }
};

struct Lake {
    Rational left;
    Rational right;
};

struct GenerationFrame {
    int k = 0;
    std::vector<Vertex> vertices; // deduplicated, sorted by image
    std::vector<Island> islands;  // left to right
    std::vector<Lake> lakes;      // positive-length gaps only
    std::vector<std::size_t> touching; // i such that islands i and i+1 share an endpoint
};

struct FrameStats {
    Rational beta_first;
    Rational beta_last;
    Rational beta_min;
    Rational beta_max;
    Rational gamma_min;     // 0 when two islands touch
    Rational gamma_min_pos; // smallest positive lake, 0 if there is none
    std::size_t island_count = 0;
};

// M_{k+1} from M_k.
std::vector<Word> advance_index_set(const IFSSpec& spec, const std::vector<Word>& current, int k);

// Vertices of generation k (deduplicated by map).
std::vector<Vertex> generation_vertices(const IFSSpec& spec, int k, std::size_t cap = default_vertex_cap);

// Groups sorted interval images into islands (closures of the connected
// components of the union of open interiors).
void assemble_islands(const std::vector<AffineMap>& sorted_maps, int generation, std::vector<Island>& islands,
                      std::vector<Lake>& lakes, std::vector<std::size_t>& touching);

GenerationFrame build_frame(const IFSSpec& spec, int k, std::size_t cap = default_vertex_cap);

FrameStats frame_stats(const GenerationFrame& frame);

// Sum of island lengths plus lake lengths (1 for every valid frame).
Rational covered_length(const GenerationFrame& frame);

} // namespace gftc

#endif
