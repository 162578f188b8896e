#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "resil/geo.hpp"
#include "resil/ontology.hpp"
#include "resil/structures.hpp"

namespace resil {

// Reads a GeoJSON FeatureCollection of Point features. Recognized property
// keys: id, category, capacity, group, access. Missing capacity falls back
// to the category's default_capacity; access defaults to open; restricted
// features must name a group. In permissive mode features with unknown
// categories, unknown groups, or out-of-range coordinates are dropped and
// described in `warnings`; otherwise they are fatal. Duplicate ids are
// always fatal.
std::vector<SocialStructure> load_structures(const std::filesystem::path& path,
                                             const Ontology& ontology,
                                             bool permissive,
                                             std::vector<std::string>* warnings);

// Fills each structure's planar position from its lon/lat location.
void project_structures(std::vector<SocialStructure>& structures,
                        const geo::GeoPoint& origin);

// Reads Polygon / MultiPolygon features with integer ids and names,
// projects them through `origin`, and validates every part. A MultiPolygon
// becomes several Neighborhood records sharing one id, in part order.
std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path,
                                             const geo::GeoPoint& origin);

// Mean structure location; the default projection origin for a run.
geo::GeoPoint mean_location(const std::vector<SocialStructure>& structures);

}  // namespace resil
