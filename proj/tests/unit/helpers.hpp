#ifndef GFTC_TEST_HELPERS_HPP
#define GFTC_TEST_HELPERS_HPP

#include "gftc/report.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace gftc::test
{

inline std::string config(const std::string& name)
{
    return std::string(GFTC_CONFIG_DIR) + "/" + name + ".json";
}

struct Loaded {
    IFSSpec spec;
    TypeTable table;
    MeasureModel model;
    DensityContext ctx() const { return {&spec, &table, &model}; }
};

inline std::unique_ptr<Loaded> load(const std::string& name)
{
    auto p = std::make_unique<Loaded>();
    p->spec = load_spec(config(name));
    p->table = classify_types(p->spec);
    p->model = build_measure(p->table);
    return p;
}

inline std::unique_ptr<Loaded> load_spec_obj(const IFSSpec& spec)
{
    auto p = std::make_unique<Loaded>();
    p->spec = spec;
    p->table = classify_types(p->spec);
    p->model = build_measure(p->table);
    return p;
}

inline AffineMap map(long pn, long pd, long bn, long bd)
{
    return {make_rational(pn, pd), make_rational(bn, bd)};
}

// plain long double powers for independent closed forms
inline long double pw(long double base, long double a)
{
    return std::pow(base, a);
}

} // namespace gftc::test

#endif
