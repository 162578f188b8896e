#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resil/structures.hpp"

namespace resil {

enum class Capital { bridging, bonding };

enum class CapitalKind { bridging, bonding, context_dependent };

enum class SectarianModifier { linear, threshold };

struct CategorySpec {
    std::string name;
    double weight = 0.0;      // base weight in [-1, 1]
    double bandwidth = 0.0;   // kernel sigma, meters
    double catchment_radius = 0.0;  // meters
    std::optional<double> default_capacity;
    std::string layer;        // density layer this category renders into
    CapitalKind capital_kind = CapitalKind::bridging;
    double context_threshold = 0.5;
};

struct Ontology {
    std::vector<CategorySpec> categories;            // file order
    std::map<std::string, double> layer_weights;     // fusion multipliers
    std::vector<std::string> groups;                 // known group names
    SectarianModifier modifier = SectarianModifier::linear;

    const CategorySpec* find(const std::string& name) const;
    const CategorySpec& require(const std::string& name) const;
    double layer_weight(const std::string& layer) const;  // default 1
    std::vector<std::string> layer_order() const;  // first appearance order
    bool known_group(const std::string& group) const;
};

// Shipped default catchment radius for transit categories: half a mile.
double transit_default_radius();

// One [<category>] section per category (weight, bandwidth, layer,
// capital_kind, optional catchment_radius / default_capacity /
// context_threshold), plus optional [ontology] (modifier, groups) and
// [layer_weights] sections. A transit-layer category may omit
// catchment_radius and gets the half-mile default; any other category
// must state one.
Ontology load_ontology(const std::filesystem::path& path);

// Signed effective weight: open access keeps the base category weight;
// restricted access scales it by the sectarian modifier of the ingroup
// fraction f. Clamped to [-1, 1].
double effective_weight(const Ontology& ont, const SocialStructure& s, double f);

// Which ledger the structure's kernel lands in. Open access is always
// bridging; restricted access is bonding, except context_dependent
// categories split on f against the category threshold.
Capital classify_capital(const Ontology& ont, const SocialStructure& s, double f);

}  // namespace resil
