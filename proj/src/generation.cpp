#include "gftc/generation.hpp"

#include <algorithm>

namespace gftc
{

namespace
{

// Extends `v` one Lambda step: keep it if its ratio is already at or below
// the threshold, otherwise append symbols until every branch drops below.
template <typename Emit>
void lambda_extend(const IFSSpec& spec, const AffineMap& v, const Word& w, const Rational& threshold, Emit&& emit)
{
    if (v.ratio <= threshold) {
        emit(v, w);
        return;
    }
    for (std::size_t j = 0; j < spec.size(); ++j) {
        Word w2 = w;
        w2.push_back(static_cast<std::uint16_t>(j));
        lambda_extend(spec, v.compose(spec.maps[j]), w2, threshold, emit);
    }
}

void sort_and_dedup(std::vector<Vertex>& vs)
{
    std::stable_sort(vs.begin(), vs.end(), [](const Vertex& a, const Vertex& b) {
        if (a.map.left() != b.map.left()) {
            return a.map.left() < b.map.left();
        }
        if (a.map.ratio != b.map.ratio) {
            return a.map.ratio < b.map.ratio;
        }
        return a.word < b.word;
    });
    vs.erase(std::unique(vs.begin(), vs.end(), [](const Vertex& a, const Vertex& b) { return a.map == b.map; }),
             vs.end());
}

} // namespace

std::vector<Word> advance_index_set(const IFSSpec& spec, const std::vector<Word>& current, int k)
{
    std::vector<Word> next;
    if (spec.scheme == Scheme::Sigma) {
        next.reserve(current.size() * spec.size());
        for (const auto& w : current) {
            for (std::size_t j = 0; j < spec.size(); ++j) {
                Word w2 = w;
                w2.push_back(static_cast<std::uint16_t>(j));
                next.push_back(std::move(w2));
            }
        }
        return next;
    }
    const Rational threshold = pow(spec.min_ratio(), k + 1);
    for (const auto& w : current) {
        lambda_extend(spec, compose_word(spec, w), w, threshold,
                      [&](const AffineMap&, const Word& w2) { next.push_back(w2); });
    }
    return next;
}

std::vector<Vertex> generation_vertices(const IFSSpec& spec, int k, std::size_t cap)
{
    std::vector<Vertex> vs{{AffineMap::identity(), {}}};
    const Rational rho_min = spec.min_ratio();
    for (int g = 0; g < k; ++g) {
        std::vector<Vertex> next;
        if (spec.scheme == Scheme::Sigma) {
            next.reserve(vs.size() * spec.size());
            for (const auto& v : vs) {
                for (std::size_t j = 0; j < spec.size(); ++j) {
                    Word w = v.word;
                    w.push_back(static_cast<std::uint16_t>(j));
                    next.push_back({v.map.compose(spec.maps[j]), std::move(w)});
                }
            }
        } else {
            const Rational threshold = pow(rho_min, g + 1);
            for (const auto& v : vs) {
                lambda_extend(spec, v.map, v.word, threshold,
                              [&](const AffineMap& m, const Word& w) { next.push_back({m, w}); });
            }
        }
        if (next.size() > cap) {
            throw FrameTooLarge("generation too large: more than " + std::to_string(cap) + " vertices at generation " +
                                    std::to_string(g + 1),
                                next.size());
        }
        sort_and_dedup(next);
        vs = std::move(next);
    }
    sort_and_dedup(vs);
    return vs;
}

void assemble_islands(const std::vector<AffineMap>& sorted_maps, int generation, std::vector<Island>& islands,
                      std::vector<Lake>& lakes, std::vector<std::size_t>& touching)
{
    islands.clear();
    lakes.clear();
    touching.clear();
    for (const auto& m : sorted_maps) {
        if (!islands.empty() && m.left() < islands.back().right) {
            auto& cur = islands.back();
            cur.right = max(cur.right, m.right());
            cur.vertices.push_back(m);
            continue;
        }
        if (!islands.empty()) {
            const auto& prev = islands.back();
            if (m.left() == prev.right) {
                touching.push_back(islands.size() - 1);
            } else {
                lakes.push_back({prev.right, m.left()});
            }
        }
        Island isl;
        isl.left = m.left();
        isl.right = m.right();
        isl.vertices.push_back(m);
        isl.generation = generation;
        islands.push_back(std::move(isl));
    }
    for (auto& isl : islands) {
        std::stable_sort(isl.vertices.begin(), isl.vertices.end(), image_less);
    }
}

GenerationFrame build_frame(const IFSSpec& spec, int k, std::size_t cap)
{
    if (k < 0) {
        throw std::invalid_argument("build_frame: negative generation");
    }
    GenerationFrame f;
    f.k = k;
    f.vertices = generation_vertices(spec, k, cap);
    std::vector<AffineMap> maps;
    maps.reserve(f.vertices.size());
    for (const auto& v : f.vertices) {
        maps.push_back(v.map);
    }
    assemble_islands(maps, k, f.islands, f.lakes, f.touching);
    return f;
}

FrameStats frame_stats(const GenerationFrame& frame)
{
    FrameStats s;
    const auto& is = frame.islands;
    s.island_count = is.size();
    if (is.empty()) {
        return s;
    }
    s.beta_first = is.front().length();
    s.beta_last = is.back().length();
    s.beta_min = s.beta_first;
    s.beta_max = s.beta_first;
    for (const auto& i : is) {
        s.beta_min = min(s.beta_min, i.length());
        s.beta_max = max(s.beta_max, i.length());
    }
    bool have_gap = false;
    for (std::size_t i = 0; i + 1 < is.size(); ++i) {
        const Rational gap = is[i + 1].left - is[i].right;
        s.gamma_min = have_gap ? min(s.gamma_min, gap) : gap;
        have_gap = true;
        if (gap > 0 && (s.gamma_min_pos == 0 || gap < s.gamma_min_pos)) {
            s.gamma_min_pos = gap;
        }
    }
    return s;
}

Rational covered_length(const GenerationFrame& frame)
{
    Rational total = 0;
    for (const auto& i : frame.islands) {
        total += i.length();
    }
    for (const auto& l : frame.lakes) {
        total += l.right - l.left;
    }
    return total;
}

} // namespace gftc
