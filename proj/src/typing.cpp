#include "gftc/typing.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <queue>

namespace gftc
{

namespace
{

template <typename Emit>
void lambda_extend(const IFSSpec& spec, const AffineMap& v, const Rational& threshold, Emit&& emit)
{
    if (v.ratio <= threshold) {
        emit(v);
        return;
    }
    for (const auto& s : spec.maps) {
        lambda_extend(spec, v.compose(s), threshold, emit);
    }
}

std::string make_key(const std::vector<NormalizedVertex>& sig, bool with_residual)
{
    std::string key;
    for (const auto& v : sig) {
        key += format_rational(v.offset);
        key += ':';
        key += format_rational(v.ratio);
        if (with_residual) {
            key += ':';
            key += format_rational(v.residual);
        }
        key += ';';
    }
    return key;
}

} // namespace

std::vector<NormalizedVertex> normalize_island(const IFSSpec& spec, const Island& island)
{
    const Rational len = island.length();
    const Rational scale = spec.scheme == Scheme::Lambda ? pow(spec.min_ratio(), island.generation) : Rational(1);
    std::vector<NormalizedVertex> sig;
    sig.reserve(island.vertices.size());
    for (const auto& v : island.vertices) {
        NormalizedVertex nv;
        nv.offset = (v.offset - island.left) / len;
        nv.ratio = v.ratio / len;
        nv.residual = spec.scheme == Scheme::Lambda ? Rational(v.ratio / scale) : Rational(0);
        sig.push_back(std::move(nv));
    }
    std::sort(sig.begin(), sig.end(), [](const NormalizedVertex& a, const NormalizedVertex& b) {
        if (a.offset != b.offset) {
            return a.offset < b.offset;
        }
        return a.ratio < b.ratio;
    });
    return sig;
}

std::vector<Island> island_offspring(const IFSSpec& spec, const Island& island)
{
    std::vector<AffineMap> maps;
    if (spec.scheme == Scheme::Sigma) {
        for (const auto& v : island.vertices) {
            for (const auto& s : spec.maps) {
                maps.push_back(v.compose(s));
            }
        }
    } else {
        const Rational threshold = pow(spec.min_ratio(), island.generation + 1);
        for (const auto& v : island.vertices) {
            lambda_extend(spec, v, threshold, [&](const AffineMap& m) { maps.push_back(m); });
        }
    }
    std::sort(maps.begin(), maps.end(), [](const AffineMap& a, const AffineMap& b) {
        if (a.left() != b.left()) {
            return a.left() < b.left();
        }
        return a.ratio < b.ratio;
    });
    maps.erase(std::unique(maps.begin(), maps.end()), maps.end());
    std::vector<Island> islands;
    std::vector<Lake> lakes;
    std::vector<std::size_t> touching;
    assemble_islands(maps, island.generation + 1, islands, lakes, touching);
    return islands;
}

TypeTable classify_types(const IFSSpec& spec, int max_generations, std::size_t max_states)
{
    TypeTable table;
    table.scheme = spec.scheme;

    std::map<std::string, int> by_key;
    auto add_state = [&](Island island) -> std::pair<int, bool> {
        auto sig = normalize_island(spec, island);
        std::string key = make_key(sig, true);
        if (auto it = by_key.find(key); it != by_key.end()) {
            return {it->second, false};
        }
        IslandState st;
        st.signature = std::move(sig);
        st.key = key;
        st.shape_key = make_key(st.signature, false);
        st.first_generation = island.generation;
        st.representative = std::move(island);
        const int id = static_cast<int>(table.states.size());
        table.states.push_back(std::move(st));
        by_key.emplace(std::move(key), id);
        return {id, true};
    };

    Island root;
    root.left = 0;
    root.right = 1;
    root.vertices = {AffineMap::identity()};
    root.generation = 0;
    add_state(std::move(root));

    std::vector<int> frontier{0};
    int gen = 0;
    table.confirmed = false;
    while (true) {
        if (gen + 1 > max_generations || table.states.size() > max_states) {
            break;
        }
        std::vector<int> next;
        for (const int s : frontier) {
            const Island parent = table.states[s].representative;
            const Rational plen = parent.length();
            std::vector<StateChild> kids;
            for (auto& child : island_offspring(spec, parent)) {
                StateChild sc;
                sc.offset = (child.left - parent.left) / plen;
                sc.ratio = child.length() / plen;
                auto [id, fresh] = add_state(std::move(child));
                sc.state = id;
                if (fresh) {
                    next.push_back(id);
                }
                kids.push_back(std::move(sc));
            }
            table.states[s].children = std::move(kids);
        }
        ++gen;
        table.generations_explored = gen;
        if (next.empty()) {
            table.confirmed = true;
            break;
        }
        frontier = std::move(next);
    }
    if (!table.confirmed) {
        return table;
    }

    // Coarsest partition compatible with the normalized maps and with the
    // ordered offspring structure.
    const std::size_t n = table.states.size();
    std::vector<int> cls(n);
    {
        std::map<std::string, int> ids;
        for (std::size_t s = 0; s < n; ++s) {
            auto [it, inserted] = ids.emplace(table.states[s].shape_key, static_cast<int>(ids.size()));
            cls[s] = it->second;
        }
    }
    std::size_t count = 0;
    for (int guard = 0;; ++guard) {
        if (guard > static_cast<int>(n) + 2) {
            throw std::logic_error("type refinement failed to stabilize");
        }
        std::map<std::string, int> ids;
        std::vector<int> next(n);
        for (std::size_t s = 0; s < n; ++s) {
            std::string sig = std::to_string(cls[s]) + "|";
            for (const auto& c : table.states[s].children) {
                sig += format_rational(c.offset) + ":" + format_rational(c.ratio) + ":" + std::to_string(cls[c.state]) +
                       ";";
            }
            auto [it, inserted] = ids.emplace(sig, static_cast<int>(ids.size()));
            next[s] = it->second;
        }
        const std::size_t new_count = ids.size();
        cls = std::move(next);
        if (new_count == count) {
            break;
        }
        count = new_count;
    }

    table.types.clear();
    for (std::size_t s = 0; s < n; ++s) {
        const int c = cls[s];
        auto it = std::find_if(table.types.begin(), table.types.end(),
                               [&](const OverlapType& t) { return cls[t.representative_state] == c; });
        if (it == table.types.end()) {
            OverlapType t;
            t.id = static_cast<int>(table.types.size());
            t.representative_state = static_cast<int>(s);
            t.first_generation = table.states[s].first_generation;
            table.types.push_back(std::move(t));
            it = std::prev(table.types.end());
        }
        it->states.push_back(static_cast<int>(s));
        it->first_generation = std::min(it->first_generation, table.states[s].first_generation);
        table.states[s].type = it->id;
    }
    table.k0 = 0;
    for (auto& t : table.types) {
        for (const auto& c : table.states[t.representative_state].children) {
            t.children.push_back({table.states[c.state].type, c.offset, c.ratio});
        }
        table.k0 = std::max(table.k0, t.first_generation);
    }
    for (auto& st : table.states) {
        st.representative.type_id = st.type;
    }
    return table;
}

IncidenceTemplate incidence_template(const TypeTable& table)
{
    IncidenceTemplate t;
    t.q = table.q();
    t.entries.assign(t.q, std::vector<std::vector<Rational>>(t.q));
    for (std::size_t i = 0; i < t.q; ++i) {
        for (const auto& c : table.types[i].children) {
            t.entries[i][c.type].push_back(c.ratio);
        }
        for (auto& e : t.entries[i]) {
            std::sort(e.begin(), e.end());
        }
    }
    return t;
}

bool check_irreducible(const IncidenceTemplate& tmpl)
{
    const std::size_t q = tmpl.q;
    if (q == 0) {
        return false;
    }
    auto reach = [&](bool forward) {
        std::vector<char> seen(q, 0);
        std::queue<std::size_t> todo;
        todo.push(0);
        seen[0] = 1;
        while (!todo.empty()) {
            const auto i = todo.front();
            todo.pop();
            for (std::size_t j = 0; j < q; ++j) {
                const bool edge = forward ? !tmpl.entries[i][j].empty() : !tmpl.entries[j][i].empty();
                if (edge && !seen[j]) {
                    seen[j] = 1;
                    todo.push(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (q == 1) {
        return !tmpl.entries[0][0].empty();
    }
    return reach(true) && reach(false);
}

std::vector<TypedIsland> expand_children(const TypeTable& table, const TypedIsland& parent)
{
    std::vector<TypedIsland> out;
    const auto& kids = table.types[parent.type].children;
    out.reserve(kids.size());
    for (const auto& c : kids) {
        out.push_back({parent.left + c.offset * parent.length, c.ratio * parent.length, c.type});
    }
    return out;
}

std::vector<TypedIsland> expand_frame(const TypeTable& table, int k, std::size_t cap)
{
    std::vector<TypedIsland> cur{{Rational(0), Rational(1), 0}};
    for (int g = 0; g < k; ++g) {
        std::vector<TypedIsland> next;
        for (const auto& p : cur) {
            for (auto& c : expand_children(table, p)) {
                next.push_back(std::move(c));
            }
        }
        if (next.size() > cap) {
            throw FrameTooLarge("generation too large: more than " + std::to_string(cap) + " islands at generation " +
                                    std::to_string(g + 1),
                                next.size());
        }
        cur = std::move(next);
    }
    return cur;
}

void for_each_profile(const TypeTable& table, int kmax, const std::function<bool(const GenerationProfile&)>& visit)
{
    const std::size_t q = table.q();
    std::vector<Rational> first(q, Rational(1)), last(q, Rational(1)), bmin(q, Rational(1)), bmax(q, Rational(1));
    std::vector<std::optional<Rational>> gmin(q), gpos(q);
    std::vector<BigInt> count(q, BigInt(1));
    auto emit = [&](int d) {
        GenerationProfile p;
        p.k = d;
        p.beta_first = first[0];
        p.beta_last = last[0];
        p.beta_min = bmin[0];
        p.beta_max = bmax[0];
        p.gamma_min = gmin[0];
        p.gamma_min_pos = gpos[0];
        p.island_count = count[0];
        return visit(p);
    };
    if (!emit(0)) {
        return;
    }
    for (int d = 1; d <= kmax; ++d) {
        std::vector<Rational> nf(q), nl(q), nmin(q), nmax(q);
        std::vector<std::optional<Rational>> ng(q), np(q);
        std::vector<BigInt> nc(q);
        for (std::size_t t = 0; t < q; ++t) {
            const auto& kids = table.types[t].children;
            nf[t] = kids.front().ratio * first[kids.front().type];
            nl[t] = kids.back().ratio * last[kids.back().type];
            nc[t] = 0;
            auto fold = [](std::optional<Rational>& acc, const Rational& v) {
                if (!acc || v < *acc) {
                    acc = v;
                }
            };
            for (std::size_t i = 0; i < kids.size(); ++i) {
                const auto& c = kids[i];
                const Rational lo = c.ratio * bmin[c.type];
                const Rational hi = c.ratio * bmax[c.type];
                nmin[t] = i == 0 ? lo : min(nmin[t], lo);
                nmax[t] = i == 0 ? hi : max(nmax[t], hi);
                nc[t] += count[c.type];
                if (gmin[c.type]) {
                    fold(ng[t], c.ratio * *gmin[c.type]);
                }
                if (gpos[c.type]) {
                    fold(np[t], c.ratio * *gpos[c.type]);
                }
                if (i + 1 < kids.size()) {
                    const Rational gap = kids[i + 1].offset - (c.offset + c.ratio);
                    fold(ng[t], gap);
                    if (gap > 0) {
                        fold(np[t], gap);
                    }
                }
            }
        }
        first = std::move(nf);
        last = std::move(nl);
        bmin = std::move(nmin);
        bmax = std::move(nmax);
        gmin = std::move(ng);
        gpos = std::move(np);
        count = std::move(nc);
        if (!emit(d)) {
            return;
        }
    }
}

GenerationProfile generation_profile(const TypeTable& table, int k)
{
    GenerationProfile out;
    for_each_profile(table, k, [&](const GenerationProfile& p) {
        out = p;
        return true;
    });
    return out;
}

std::string table_to_json(const TypeTable& table)
{
    using nlohmann::json;
    json doc;
    doc["confirmed"] = table.confirmed;
    doc["k0"] = table.k0;
    doc["q"] = table.q();
    doc["states"] = table.states.size();
    doc["types"] = json::array();
    for (const auto& t : table.types) {
        const auto& rep = table.representative(t.id);
        json jt;
        jt["id"] = t.id + 1;
        jt["first_generation"] = t.first_generation;
        jt["representative"] = {{"left", format_rational(rep.left)},
                                {"right", format_rational(rep.right)},
                                {"generation", rep.generation}};
        jt["signature"] = json::array();
        for (const auto& v : table.states[t.representative_state].signature) {
            jt["signature"].push_back({format_rational(v.offset), format_rational(v.ratio)});
        }
        jt["children"] = json::array();
        for (const auto& c : t.children) {
            jt["children"].push_back(
                {{"type", c.type + 1}, {"offset", format_rational(c.offset)}, {"ratio", format_rational(c.ratio)}});
        }
        doc["types"].push_back(std::move(jt));
    }
    return doc.dump(2);
}

} // namespace gftc
