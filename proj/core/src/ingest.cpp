#include "resil/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "resil/errors.hpp"

namespace resil {

using json = nlohmann::json;

namespace {

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t pos = std::min(e.byte, text.size());
        long line = 1 + std::count(text.begin(), text.begin() + pos, '\n');
        throw IngestError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
}

const json& feature_array(const json& doc, const std::filesystem::path& path) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array())
        throw IngestError(path.string() + ": expected a GeoJSON FeatureCollection");
    return doc["features"];
}

const json* find_id(const json& props, const json& feature) {
    if (props.contains("id")) return &props["id"];
    if (feature.contains("id")) return &feature["id"];
    return nullptr;
}

std::string structure_id(const json& props, const json& feature, std::size_t index,
                         const std::filesystem::path& path) {
    const json* id = find_id(props, feature);
    if (!id)
        throw IngestError(path.string() + ": feature " + std::to_string(index) +
                          " has no id");
    if (id->is_string()) return id->get<std::string>();
    if (id->is_number_integer()) return std::to_string(id->get<long long>());
    throw IngestError(path.string() + ": feature " + std::to_string(index) +
                      " has a non-scalar id");
}

long long neighborhood_id(const json& props, const json& feature, std::size_t index,
                          const std::filesystem::path& path) {
    const json* id = find_id(props, feature);
    if (!id)
        throw IngestError(path.string() + ": feature " + std::to_string(index) +
                          " has no id");
    if (id->is_number_integer()) return id->get<long long>();
    if (id->is_string()) {
        const std::string& s = id->get_ref<const std::string&>();
        try {
            std::size_t used = 0;
            long long v = std::stoll(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
    }
    throw IngestError(path.string() + ": feature " + std::to_string(index) +
                      " needs an integer id");
}

geo::GeoPoint point_coords(const json& geom, const std::string& id,
                           const std::filesystem::path& path) {
    if (!geom.is_object() || geom.value("type", "") != "Point")
        throw IngestError(path.string() + ": feature '" + id +
                          "' geometry is not a Point");
    if (!geom.contains("coordinates"))
        throw IngestError(path.string() + ": feature '" + id + "' has no coordinates");
    const json& c = geom["coordinates"];
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
        throw IngestError(path.string() + ": feature '" + id + "' has bad coordinates");
    return {c[0].get<double>(), c[1].get<double>()};
}

geo::Ring parse_ring(const json& arr, const std::string& id,
                     const std::filesystem::path& path, const geo::GeoPoint& origin) {
    if (!arr.is_array() || arr.size() < 4)
        throw IngestError(path.string() + ": feature '" + id +
                          "' has a ring with fewer than 4 positions");
    geo::Ring ring;
    ring.reserve(arr.size());
    for (const json& pos : arr) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() ||
            !pos[1].is_number())
            throw IngestError(path.string() + ": feature '" + id +
                              "' has a bad ring position");
        geo::GeoPoint g{pos[0].get<double>(), pos[1].get<double>()};
        if (!geo::valid_coordinates(g))
            throw IngestError(path.string() + ": feature '" + id +
                              "' has out-of-range coordinates");
        ring.push_back(geo::project(g, origin));
    }
    const geo::PlanarPoint& a = ring.front();
    const geo::PlanarPoint& b = ring.back();
    if (a.x != b.x || a.y != b.y) ring.push_back(a);
    return ring;
}

geo::Polygon parse_polygon(const json& rings, const std::string& id,
                           const std::filesystem::path& path,
                           const geo::GeoPoint& origin) {
    if (!rings.is_array() || rings.empty())
        throw IngestError(path.string() + ": feature '" + id + "' has no rings");
    geo::Polygon poly;
    poly.exterior = parse_ring(rings[0], id, path, origin);
    for (std::size_t i = 1; i < rings.size(); ++i)
        poly.holes.push_back(parse_ring(rings[i], id, path, origin));
    try {
        geo::validate(poly);
    } catch (const std::exception& e) {
        throw IngestError(path.string() + ": feature '" + id + "': " + e.what());
    }
    if (geo::ring_self_intersects(poly.exterior))
        throw IngestError(path.string() + ": feature '" + id +
                          "' boundary self-intersects");
    return poly;
}

}  // namespace

std::vector<SocialStructure> load_structures(const std::filesystem::path& path,
                                             const Ontology& ontology,
                                             bool permissive,
                                             std::vector<std::string>* warnings) {
    json doc = parse_file(path);
    const json& features = feature_array(doc, path);

    std::vector<SocialStructure> out;
    out.reserve(features.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const json& f = features[i];
        if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object())
            throw IngestError(path.string() + ": feature " + std::to_string(i) +
                              " has no properties");
        const json& props = f["properties"];
        std::string id = structure_id(props, f, i, path);
        if (!seen.insert(id).second)
            throw IngestError(path.string() + ": duplicate structure id '" + id + "'");

        std::string category = props.value("category", "");
        if (category.empty())
            throw IngestError(path.string() + ": feature '" + id + "' has no category");
        const CategorySpec* cat = ontology.find(category);
        if (!cat) {
            if (permissive) {
                if (warnings)
                    warnings->push_back("skipped structure '" + id +
                                        "': unknown category '" + category + "'");
                continue;
            }
            throw IngestError(path.string() + ": feature '" + id +
                              "' has unknown category '" + category + "'");
        }

        SocialStructure s;
        s.id = std::move(id);
        s.category = std::move(category);
        if (!f.contains("geometry"))
            throw IngestError(path.string() + ": feature '" + s.id + "' has no geometry");
        s.location = point_coords(f["geometry"], s.id, path);
        if (!geo::valid_coordinates(s.location)) {
            if (permissive) {
                if (warnings)
                    warnings->push_back("skipped structure '" + s.id +
                                        "': out-of-range coordinates");
                continue;
            }
            throw IngestError(path.string() + ": feature '" + s.id +
                              "' has out-of-range coordinates");
        }

        if (props.contains("capacity")) {
            if (!props["capacity"].is_number())
                throw IngestError(path.string() + ": feature '" + s.id +
                                  "' capacity is not a number");
            s.capacity = props["capacity"].get<double>();
        } else if (cat->default_capacity) {
            s.capacity = *cat->default_capacity;
        } else {
            throw IngestError(path.string() + ": feature '" + s.id +
                              "' has no capacity and category '" + s.category +
                              "' has no default_capacity");
        }
        if (!(s.capacity > 0.0))
            throw IngestError(path.string() + ": feature '" + s.id +
                              "' capacity must be positive");

        std::string access = props.value("access", "open");
        if (access == "open")
            s.access = Access::open;
        else if (access == "restricted")
            s.access = Access::restricted;
        else
            throw IngestError(path.string() + ": feature '" + s.id +
                              "' has unknown access '" + access + "'");

        if (props.contains("group")) {
            if (!props["group"].is_string())
                throw IngestError(path.string() + ": feature '" + s.id +
                                  "' group is not a string");
            s.group = props["group"].get<std::string>();
            if (!ontology.groups.empty() && !ontology.known_group(*s.group)) {
                if (permissive) {
                    if (warnings)
                        warnings->push_back("skipped structure '" + s.id +
                                            "': unknown group '" + *s.group + "'");
                    continue;
                }
                throw IngestError(path.string() + ": feature '" + s.id +
                                  "' has unknown group '" + *s.group + "'");
            }
        }
        if (s.access == Access::restricted && !s.group)
            throw IngestError(path.string() + ": feature '" + s.id +
                              "' is restricted but has no group");
        out.push_back(std::move(s));
    }
    return out;
}

void project_structures(std::vector<SocialStructure>& structures,
                        const geo::GeoPoint& origin) {
    for (SocialStructure& s : structures) s.position = geo::project(s.location, origin);
}

std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path,
                                             const geo::GeoPoint& origin) {
    json doc = parse_file(path);
    const json& features = feature_array(doc, path);

    std::vector<Neighborhood> out;
    std::set<long long> seen;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const json& f = features[i];
        if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object())
            throw IngestError(path.string() + ": feature " + std::to_string(i) +
                              " has no properties");
        const json& props = f["properties"];
        long long id = neighborhood_id(props, f, i, path);
        if (!seen.insert(id).second)
            throw IngestError(path.string() + ": duplicate neighborhood id " +
                              std::to_string(id));
        std::string name = props.value("name", "");
        if (name.empty())
            throw IngestError(path.string() + ": feature " + std::to_string(id) +
                              " has no name");
        std::string tag = std::to_string(id);

        if (!f.contains("geometry") || !f["geometry"].is_object())
            throw IngestError(path.string() + ": feature '" + tag +
                              "' has no geometry");
        const json& geom = f["geometry"];
        std::string type = geom.value("type", "");
        if (type == "Polygon") {
            if (!geom.contains("coordinates"))
                throw IngestError(path.string() + ": feature '" + tag +
                                  "' has no coordinates");
            out.push_back({id, name, parse_polygon(geom["coordinates"], tag, path,
                                                   origin)});
        } else if (type == "MultiPolygon") {
            if (!geom.contains("coordinates"))
                throw IngestError(path.string() + ": feature '" + tag +
                                  "' has no coordinates");
            const json& parts = geom["coordinates"];
            if (!parts.is_array() || parts.empty())
                throw IngestError(path.string() + ": feature '" + tag +
                                  "' MultiPolygon has no parts");
            for (const json& part : parts)
                out.push_back({id, name, parse_polygon(part, tag, path, origin)});
        } else {
            throw IngestError(path.string() + ": feature '" + tag +
                              "' geometry must be Polygon or MultiPolygon");
        }
    }
    if (out.empty()) throw IngestError(path.string() + ": no neighborhoods");
    return out;
}

geo::GeoPoint mean_location(const std::vector<SocialStructure>& structures) {
    if (structures.empty()) throw IngestError("no structures to derive an origin from");
    double lon = 0.0, lat = 0.0;
    for (const SocialStructure& s : structures) {
        lon += s.location.lon;
        lat += s.location.lat;
    }
    double n = static_cast<double>(structures.size());
    return {lon / n, lat / n};
}

}  // namespace resil
