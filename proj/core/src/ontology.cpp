#include "resil/ontology.hpp"

#include <algorithm>
#include <sstream>

#include "resil/errors.hpp"
#include "resil/table.hpp"

namespace resil {

double transit_default_radius() { return 0.5 * 1609.344; }

const CategorySpec* Ontology::find(const std::string& name) const {
    for (const auto& c : categories)
        if (c.name == name) return &c;
    return nullptr;
}

const CategorySpec& Ontology::require(const std::string& name) const {
    const CategorySpec* c = find(name);
    if (!c) throw ComputeError("unknown category '" + name + "'");
    return *c;
}

double Ontology::layer_weight(const std::string& layer) const {
    auto it = layer_weights.find(layer);
    return it == layer_weights.end() ? 1.0 : it->second;
}

std::vector<std::string> Ontology::layer_order() const {
    std::vector<std::string> order;
    for (const CategorySpec& c : categories)
        if (std::find(order.begin(), order.end(), c.layer) == order.end())
            order.push_back(c.layer);
    return order;
}

bool Ontology::known_group(const std::string& group) const {
    return std::find(groups.begin(), groups.end(), group) != groups.end();
}

Ontology load_ontology(const std::filesystem::path& path) {
    Table t = load_table(path);
    Ontology ont;
    for (const TableSection& sec : t.sections) {
        if (sec.name == "ontology") {
            std::string mod = sec.get_or("modifier", "linear");
            if (mod == "linear")
                ont.modifier = SectarianModifier::linear;
            else if (mod == "threshold")
                ont.modifier = SectarianModifier::threshold;
            else
                throw ConfigError(path.string() + ": unknown sectarian modifier '" +
                                  mod + "'");
            if (sec.has("groups")) {
                std::istringstream in(sec.get("groups"));
                std::string name;
                while (in >> name) ont.groups.push_back(name);
            }
            continue;
        }
        if (sec.name == "layer_weights") {
            for (const auto& [layer, raw] : sec.entries) {
                (void)raw;
                ont.layer_weights[layer] = sec.get_double(layer);
            }
            continue;
        }
        if (sec.name.empty())
            throw ConfigError(path.string() + ": keys outside any section");

        CategorySpec c;
        c.name = sec.name;
        c.weight = sec.get_double("weight");
        if (!(c.weight >= -1.0 && c.weight <= 1.0))
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] weight out of [-1,1]");
        c.bandwidth = sec.get_double("bandwidth");
        if (!(c.bandwidth > 0.0))
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] bandwidth must be positive");
        c.layer = sec.get_or("layer", sec.name);
        if (sec.has("catchment_radius")) {
            c.catchment_radius = sec.get_double("catchment_radius");
        } else if (c.layer == "transit") {
            c.catchment_radius = transit_default_radius();
        } else {
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] needs a catchment_radius (only transit-layer "
                              "categories have a shipped default)");
        }
        if (!(c.catchment_radius > 0.0))
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] catchment_radius must be positive");
        if (sec.has("default_capacity")) {
            double cap = sec.get_double("default_capacity");
            if (!(cap > 0.0))
                throw ConfigError(path.string() + ": [" + sec.name +
                                  "] default_capacity must be positive");
            c.default_capacity = cap;
        }
        std::string kind = sec.get_or("capital_kind", "bridging");
        if (kind == "bridging")
            c.capital_kind = CapitalKind::bridging;
        else if (kind == "bonding")
            c.capital_kind = CapitalKind::bonding;
        else if (kind == "context_dependent")
            c.capital_kind = CapitalKind::context_dependent;
        else
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] unknown capital_kind '" + kind + "'");
        c.context_threshold = sec.get_double_or("context_threshold", 0.5);
        if (!(c.context_threshold >= 0.0 && c.context_threshold <= 1.0))
            throw ConfigError(path.string() + ": [" + sec.name +
                              "] context_threshold out of [0,1]");
        ont.categories.push_back(std::move(c));
    }
    if (ont.categories.empty())
        throw ConfigError(path.string() + ": ontology defines no categories");
    for (const auto& [layer, weight] : ont.layer_weights) {
        (void)weight;
        bool used = false;
        for (const CategorySpec& c : ont.categories) used |= c.layer == layer;
        if (!used)
            throw ConfigError(path.string() + ": layer_weights entry '" + layer +
                              "' matches no category layer");
    }
    return ont;
}

namespace {

double checked_fraction(const SocialStructure& s, double f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw ComputeError("structure '" + s.id + "' ingroup fraction out of [0,1]");
    return f;
}

}  // namespace

double effective_weight(const Ontology& ont, const SocialStructure& s, double f) {
    const CategorySpec& cat = ont.require(s.category);
    if (s.access == Access::open) return cat.weight;
    checked_fraction(s, f);
    double scale;
    if (ont.modifier == SectarianModifier::linear) {
        scale = 2.0 * f - 1.0;
    } else {
        scale = f > cat.context_threshold ? 1.0 : -1.0;
    }
    return std::clamp(cat.weight * scale, -1.0, 1.0);
}

Capital classify_capital(const Ontology& ont, const SocialStructure& s, double f) {
    const CategorySpec& cat = ont.require(s.category);
    if (s.access == Access::open) return Capital::bridging;
    if (cat.capital_kind == CapitalKind::context_dependent)
        return checked_fraction(s, f) > cat.context_threshold ? Capital::bonding
                                                              : Capital::bridging;
    return Capital::bonding;
}

}  // namespace resil
