#include "gftc/ifs.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gftc
{

using nlohmann::json;

bool image_less(const AffineMap& a, const AffineMap& b)
{
    if (a.left() != b.left()) {
        return a.left() < b.left();
    }
    return a.right() < b.right();
}

std::string format_word(const Word& w)
{
    if (w.empty()) {
        return "()";
    }
    std::string s = "(";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += std::to_string(w[i] + 1);
    }
    return s + ")";
}

Rational IFSSpec::min_ratio() const
{
    Rational r = maps.front().ratio;
    for (const auto& m : maps) {
        r = min(r, m.ratio);
    }
    return r;
}

IFSSpec make_spec(std::vector<AffineMap> maps, Scheme scheme, Mode mode, Tolerances tol)
{
    if (maps.size() < 2) {
        throw SpecError("an IFS needs at least two maps");
    }
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const auto& m = maps[i];
        if (m.ratio < 0) {
            throw SpecError("map " + std::to_string(i + 1) +
                            ": negative contraction ratios are not supported (orientation-reversing maps are only "
                            "handled in special cases)");
        }
        if (m.ratio == 0 || m.ratio >= 1) {
            throw SpecError("map " + std::to_string(i + 1) + ": contraction ratio out of range (need 0 < rho < 1)");
        }
        if (m.left() < 0 || m.right() > 1) {
            throw SpecError("map " + std::to_string(i + 1) + ": image escapes [0,1]");
        }
    }
    if (!(tol.alpha_tol > 0) || !(tol.dist_tol > 0)) {
        throw SpecError("tolerances must be positive");
    }

    std::vector<int> order(maps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return image_less(maps[a], maps[b]); });

    IFSSpec spec;
    spec.scheme = scheme;
    spec.mode = mode;
    spec.tolerances = tol;
    for (int idx : order) {
        spec.maps.push_back(maps[idx]);
        spec.permutation.push_back(idx);
    }
    for (std::size_t i = 1; i < spec.maps.size(); ++i) {
        if (spec.maps[i] == spec.maps[i - 1]) {
            throw SpecError("duplicate maps in the IFS");
        }
    }
    if (spec.first().left() != 0) {
        throw SpecError("the first image must start at 0 (S_1(0) = 0)");
    }
    if (spec.last().right() != 1) {
        throw SpecError("the last image must end at 1 (S_m(1) = 1)");
    }
    return spec;
}

namespace
{

Rational rational_field(const json& j, const char* name)
{
    if (!j.contains(name)) {
        throw SpecError(std::string("map is missing field '") + name + "'");
    }
    const auto& v = j.at(name);
    try {
        if (v.is_string()) {
            return parse_rational(v.get<std::string>());
        }
        if (v.is_number_integer()) {
            return Rational(v.get<long>());
        }
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("field '") + name + "': " + e.what());
    }
    throw SpecError(std::string("field '") + name + "' must be a rational string such as \"1/3\"");
}

} // namespace

IFSSpec parse_spec(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("malformed config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SpecError("config must be a JSON object");
    }
    if (!doc.contains("maps") || !doc["maps"].is_array()) {
        throw SpecError("config needs a 'maps' array");
    }
    std::vector<AffineMap> maps;
    for (const auto& m : doc["maps"]) {
        if (!m.is_object()) {
            throw SpecError("each map must be an object {\"rho\": ..., \"b\": ...}");
        }
        maps.push_back({rational_field(m, "rho"), rational_field(m, "b")});
    }

    Scheme scheme = Scheme::Sigma;
    if (doc.contains("scheme")) {
        if (!doc["scheme"].is_string()) {
            throw SpecError("field 'scheme' must be a string");
        }
        const auto s = doc["scheme"].get<std::string>();
        if (s == "sigma") {
            scheme = Scheme::Sigma;
        } else if (s == "lambda") {
            scheme = Scheme::Lambda;
        } else {
            throw SpecError("unknown scheme '" + s + "' (expected sigma or lambda)");
        }
    }
    Mode mode = Mode::Standard;
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) {
            throw SpecError("field 'mode' must be a string");
        }
        const auto s = doc["mode"].get<std::string>();
        if (s == "standard") {
            mode = Mode::Standard;
        } else if (s == "relaxed-b") {
            mode = Mode::RelaxedB;
        } else {
            throw SpecError("unknown mode '" + s + "' (expected standard or relaxed-b)");
        }
    }
    Tolerances tol;
    try {
        if (doc.contains("alpha_tol")) {
            tol.alpha_tol = doc["alpha_tol"].get<double>();
        }
        if (doc.contains("dist_tol")) {
            tol.dist_tol = doc["dist_tol"].get<double>();
        }
    } catch (const json::exception& e) {
        throw SpecError(std::string("bad tolerance: ") + e.what());
    }
    return make_spec(std::move(maps), scheme, mode, tol);
}

IFSSpec load_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot read config '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::string spec_to_json(const IFSSpec& spec)
{
    json doc;
    doc["maps"] = json::array();
    for (const auto& m : spec.maps) {
        doc["maps"].push_back({{"rho", format_rational(m.ratio)}, {"b", format_rational(m.offset)}});
    }
    doc["scheme"] = to_string(spec.scheme);
    doc["mode"] = to_string(spec.mode);
    doc["alpha_tol"] = spec.tolerances.alpha_tol;
    doc["dist_tol"] = spec.tolerances.dist_tol;
    return doc.dump(2);
}

AffineMap compose_word(const IFSSpec& spec, const Word& w)
{
    AffineMap acc = AffineMap::identity();
    for (const auto s : w) {
        if (s >= spec.maps.size()) {
            throw std::out_of_range("word symbol " + std::to_string(s + 1) + " out of range");
        }
        acc = acc.compose(spec.maps[s]);
    }
    return acc;
}

const char* to_string(Scheme s)
{
    return s == Scheme::Sigma ? "sigma" : "lambda";
}

const char* to_string(Mode m)
{
    return m == Mode::Standard ? "standard" : "relaxed-b";
}

} // namespace gftc
