#pragma once

#include <optional>
#include <string>

#include "resil/geo.hpp"

namespace resil {

enum class Access { open, restricted };

// A point feature of civic life: clinic, mosque, market, transit stop, ...
struct SocialStructure {
    std::string id;
    std::string category;             // key into the ontology
    geo::GeoPoint location;           // as ingested
    geo::PlanarPoint position{0, 0};  // after projection
    double capacity = 1.0;            // persons served (beds, seats, ...)
    std::optional<std::string> group; // sectarian affiliation
    Access access = Access::open;
};

// One polygon part of a neighborhood; MultiPolygon features become several
// records sharing the id.
struct Neighborhood {
    long long id = 0;
    std::string name;
    geo::Polygon boundary;  // planar
};

}  // namespace resil
