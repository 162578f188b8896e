// Deterministic generator for the bundled Jakarta-flavored demo fixtures.
// Writes structures.geojson, neighborhoods.geojson, population.asc,
// group_santri.asc, ontology.ini, and run.ini into --out.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "resil/geo.hpp"
#include "resil/raster.hpp"
#include "resil/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using resil::geo::GeoPoint;
using resil::geo::PlanarPoint;

namespace {

constexpr std::uint64_t kFixtureSeed = 109;
const GeoPoint kOrigin{106.8, -6.2};

// 5x5 wards, row-major from the northwest corner, 4 km squares.
const char* kWardNames[25] = {
    "Gambir",        "Kebon Kelapa",  "Petojo Utara", "Duri Pulo",
    "Cideng",        "Petojo Selatan", "Kenari",      "Paseban",
    "Kramat",        "Kwitang",       "Senen",        "Bungur",
    "Utan Panjang",  "Kemayoran",     "Serdang",      "Harapan Mulya",
    "Cempaka Baru",  "Sumur Batu",    "Galur",        "Tanah Tinggi",
    "Kampung Rawa",  "Johar Baru",    "Manggarai",    "Manggarai Selatan",
    "Bukit Duri"};

ordered_json lonlat(const PlanarPoint& p) {
    GeoPoint g = resil::geo::unproject(p, kOrigin);
    return ordered_json::array({g.lon, g.lat});
}

ordered_json box_ring(double x0, double y0, double x1, double y1) {
    ordered_json ring = ordered_json::array();
    ring.push_back(lonlat({x0, y0}));
    ring.push_back(lonlat({x1, y0}));
    ring.push_back(lonlat({x1, y1}));
    ring.push_back(lonlat({x0, y1}));
    ring.push_back(lonlat({x0, y0}));
    return ring;
}

ordered_json hole_ring(double x0, double y0, double x1, double y1) {
    ordered_json ring = ordered_json::array();
    ring.push_back(lonlat({x0, y0}));
    ring.push_back(lonlat({x0, y1}));
    ring.push_back(lonlat({x1, y1}));
    ring.push_back(lonlat({x1, y0}));
    ring.push_back(lonlat({x0, y0}));
    return ring;
}

void write_json(const ordered_json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        std::exit(1);
    }
    out << doc.dump(2) << "\n";
}

ordered_json make_neighborhoods() {
    ordered_json features = ordered_json::array();
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
            int id = 5 * r + c + 1;
            double x0 = -10000.0 + 4000.0 * c;
            double x1 = x0 + 4000.0;
            double y1 = 10000.0 - 4000.0 * r;
            double y0 = y1 - 4000.0;

            ordered_json geom;
            if (id == 25) {
                // Split by a canal: two parts, one id.
                ordered_json parts = ordered_json::array();
                parts.push_back(
                    ordered_json::array({box_ring(x0, y0, x0 + 2200.0, y1)}));
                parts.push_back(
                    ordered_json::array({box_ring(x0 + 2600.0, y0, x1, y1)}));
                geom["type"] = "MultiPolygon";
                geom["coordinates"] = parts;
            } else if (id == 13) {
                // Reservoir in the middle of the ward.
                ordered_json rings = ordered_json::array();
                rings.push_back(box_ring(x0, y0, x1, y1));
                rings.push_back(hole_ring(-300.0, -300.0, 300.0, 300.0));
                geom["type"] = "Polygon";
                geom["coordinates"] = rings;
            } else {
                geom["type"] = "Polygon";
                geom["coordinates"] = ordered_json::array({box_ring(x0, y0, x1, y1)});
            }

            ordered_json f;
            f["type"] = "Feature";
            f["properties"] = {{"id", id}, {"name", kWardNames[id - 1]}};
            f["geometry"] = geom;
            features.push_back(std::move(f));
        }
    }
    ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);
    return doc;
}

// Population: a lightly textured plain, so kernel amplitudes track supply
// rather than shifts in the denominator.
resil::Raster make_population() {
    resil::GridHeader h;
    h.ncols = 200;
    h.nrows = 200;
    h.xllcorner = -10000.0;
    h.yllcorner = -10000.0;
    h.cellsize = 100.0;
    h.nodata = -9999.0;
    resil::Raster r = resil::Raster::filled(h, 0.0);

    auto jitter = resil::rng::make_stream(kFixtureSeed, 2);
    auto gaps = resil::rng::make_stream(kFixtureSeed, 3);
    for (int row = 0; row < h.nrows; ++row) {
        for (int col = 0; col < h.ncols; ++col) {
            double v = 32.0 + 14.0 * resil::rng::uniform01(jitter);
            if (resil::rng::uniform01(gaps) < 0.006) {
                r.at(row, col) = h.nodata;
            } else {
                r.at(row, col) = std::floor(v);
            }
        }
    }
    return r;
}

// Santri population share: dominant in the west, marginal in the east.
resil::Raster make_group_fraction(const resil::GridHeader& h) {
    resil::Raster r = resil::Raster::filled(h, 0.0);
    auto jitter = resil::rng::make_stream(kFixtureSeed, 4);
    for (int row = 0; row < h.nrows; ++row) {
        for (int col = 0; col < h.ncols; ++col) {
            PlanarPoint c = r.cell_center(row, col);
            double t = (c.x + 10000.0) / 20000.0;
            double f = 0.95 - 0.9 * t + 0.04 * (resil::rng::uniform01(jitter) - 0.5);
            r.at(row, col) = std::min(0.97, std::max(0.03, f));
        }
    }
    return r;
}

// Ward tile for a planar position, clamped to the 5x5 grid.
void ward_cell(double x, double y, int* row, int* col) {
    *row = std::min(4, std::max(0, static_cast<int>((10000.0 - y) / 4000.0)));
    *col = std::min(4, std::max(0, static_cast<int>((x + 10000.0) / 4000.0)));
}

// Placement acceptance weights. Worship structures concentrate in the
// southeast, where the santri share is low and their kernels run negative;
// everything else crowds the well-served northwest. The split gives the
// ward map a high plateau, a low basin, and a mixed band between.
double place_weight(bool worship, double x, double y) {
    int r = 0, c = 0;
    ward_cell(x, y, &r, &c);
    bool nw = r <= 2 && c <= 2;
    bool se = r >= 2 && c >= 2;
    if (r == 2 && c == 2) return worship ? 0.3 : 0.8;
    if (worship) return se ? 1.0 : (nw ? 0.25 : 0.4);
    return nw ? 1.0 : (se ? 0.06 : 0.35);
}

double capacity_scale(bool worship, double x, double y) {
    if (worship) return 1.0;
    int r = 0, c = 0;
    ward_cell(x, y, &r, &c);
    if (r <= 2 && c <= 2 && !(r == 2 && c == 2)) return 1.5;
    if (r >= 2 && c >= 2 && !(r == 2 && c == 2)) return 0.6;
    return 1.0;
}

struct CategoryPlan {
    const char* name;
    int count;
    bool restricted;
    double default_capacity;
};

ordered_json make_structures() {
    const CategoryPlan plan[] = {
        {"mosque", 48, true, 300.0},    {"church", 12, true, 200.0},
        {"clinic", 34, false, 60.0},    {"hospital", 8, false, 400.0},
        {"community_center", 34, false, 150.0}, {"market", 30, false, 500.0},
        {"bus_stop", 28, false, 40.0},  {"train_station", 6, false, 800.0},
    };

    auto pos = resil::rng::make_stream(kFixtureSeed, 0);
    auto cap = resil::rng::make_stream(kFixtureSeed, 1);
    auto misc = resil::rng::make_stream(kFixtureSeed, 5);

    ordered_json features = ordered_json::array();
    int serial = 0;
    for (const CategoryPlan& cat : plan) {
        bool worship = cat.restricted;
        for (int i = 0; i < cat.count; ++i) {
            double x = 0.0, y = 0.0;
            for (;;) {
                x = -9600.0 + 19200.0 * resil::rng::uniform01(pos);
                y = -9600.0 + 19200.0 * resil::rng::uniform01(pos);
                if (resil::rng::uniform01(pos) < place_weight(worship, x, y)) break;
            }
            ++serial;
            char id[8];
            std::snprintf(id, sizeof id, "s%03d", serial);

            ordered_json props;
            props["id"] = id;
            props["category"] = cat.name;
            double scale = (0.7 + 0.9 * resil::rng::uniform01(cap)) *
                           capacity_scale(worship, x, y);
            bool omit_capacity = resil::rng::uniform01(misc) < 0.12;
            if (!omit_capacity)
                props["capacity"] = std::floor(cat.default_capacity * scale);
            bool restricted = cat.restricted;
            if (!restricted && std::string(cat.name) == "clinic" &&
                resil::rng::uniform01(misc) < 0.06)
                restricted = true;  // a few members-only clinics
            if (restricted) {
                props["access"] = "restricted";
                props["group"] = "santri";
            } else if (resil::rng::uniform01(misc) < 0.1) {
                props["access"] = "open";
            }

            ordered_json f;
            f["type"] = "Feature";
            f["properties"] = std::move(props);
            f["geometry"] = {{"type", "Point"}, {"coordinates", lonlat({x, y})}};
            features.push_back(std::move(f));
        }
    }
    ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);
    return doc;
}

const char* kOntology = R"([ontology]
modifier = linear
groups = santri

[layer_weights]
medical = 1
worship = 1
community = 1
transit = 0.9

[hospital]
weight = 0.9
bandwidth = 1000
catchment_radius = 1200
default_capacity = 400
layer = medical
capital_kind = bridging

[clinic]
weight = 0.6
bandwidth = 600
catchment_radius = 800
default_capacity = 60
layer = medical
capital_kind = bridging

[mosque]
weight = 0.7
bandwidth = 500
catchment_radius = 700
default_capacity = 300
layer = worship
capital_kind = bonding

[church]
weight = 0.7
bandwidth = 500
catchment_radius = 700
default_capacity = 200
layer = worship
capital_kind = bonding

[community_center]
weight = 0.5
bandwidth = 500
catchment_radius = 600
default_capacity = 150
layer = community
capital_kind = bridging

[market]
weight = 0.4
bandwidth = 400
catchment_radius = 500
default_capacity = 500
layer = community
capital_kind = bridging

[bus_stop]
weight = 0.3
bandwidth = 400
default_capacity = 40
layer = transit
capital_kind = bridging

[train_station]
weight = 0.8
bandwidth = 400
catchment_radius = 1000
default_capacity = 800
layer = transit
capital_kind = bridging
)";

const char* kRunConfig = R"(# Demo city run.

[inputs]
structures = structures.geojson
neighborhoods = neighborhoods.geojson
population = population.asc
group = group_santri.asc
ontology = ontology.ini

[run]
seed = 7
n_perm = 999
alpha_map = 0.05
alpha_report = 0.001
origin_lon = 106.8
origin_lat = -6.2
out = out

[weights]
kind = queen
)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled demo-city fixtures"};
    std::string out_dir = "data/toycity";
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);

    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    write_json(make_neighborhoods(), dir / "neighborhoods.geojson");
    write_json(make_structures(), dir / "structures.geojson");

    resil::Raster pop = make_population();
    resil::write_ascii_grid(pop, dir / "population.asc");
    resil::write_ascii_grid(make_group_fraction(pop.header), dir / "group_santri.asc");

    std::ofstream(dir / "ontology.ini", std::ios::trunc) << kOntology;
    std::ofstream(dir / "run.ini", std::ios::trunc) << kRunConfig;

    std::cout << "wrote fixtures to " << dir.string() << "\n";
    return 0;
}
