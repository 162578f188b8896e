#include "resil/spatial_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "resil/errors.hpp"
#include "resil/rng.hpp"

namespace resil {

std::vector<HoodGroup> group_by_id(const std::vector<Neighborhood>& hoods) {
    std::vector<HoodGroup> groups;
    std::map<long long, int> index;
    for (int i = 0; i < static_cast<int>(hoods.size()); ++i) {
        auto it = index.find(hoods[i].id);
        if (it == index.end()) {
            index.emplace(hoods[i].id, static_cast<int>(groups.size()));
            groups.push_back({hoods[i].id, hoods[i].name, {i}});
        } else {
            groups[it->second].parts.push_back(i);
        }
    }
    return groups;
}

AggregateResult aggregate(const Raster& surface,
                          const std::vector<Neighborhood>& hoods,
                          const std::vector<HoodGroup>& groups) {
    std::vector<int> record_group(hoods.size(), -1);
    for (int g = 0; g < static_cast<int>(groups.size()); ++g)
        for (int part : groups[g].parts) record_group[part] = g;

    std::vector<double> sum(groups.size(), 0.0);
    std::vector<int> count(groups.size(), 0);
    const GridHeader& h = surface.header;
    for (int row = 0; row < h.nrows; ++row) {
        for (int col = 0; col < h.ncols; ++col) {
            double v = surface.at(row, col);
            if (surface.is_nodata(v)) continue;
            geo::PlanarPoint c = surface.cell_center(row, col);
            for (std::size_t rec = 0; rec < hoods.size(); ++rec) {
                const geo::Polygon& poly = hoods[rec].boundary;
                if (!poly.bounds().contains(c, 0.0)) continue;
                if (!geo::contains(poly, c)) continue;
                int g = record_group[rec];
                sum[g] += v;
                ++count[g];
                break;
            }
        }
    }
    AggregateResult out;
    out.value.resize(groups.size(), 0.0);
    out.cells = std::move(count);
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (out.cells[g] > 0) out.value[g] = sum[g] / out.cells[g];
    return out;
}

double SpatialWeights::s0() const {
    double s = 0.0;
    for (const auto& row : weights)
        for (double w : row) s += w;
    return s;
}

namespace {

void row_standardize(SpatialWeights& w) {
    w.weights.assign(w.neighbors.size(), {});
    for (std::size_t i = 0; i < w.neighbors.size(); ++i) {
        std::size_t deg = w.neighbors[i].size();
        if (deg) w.weights[i].assign(deg, 1.0 / static_cast<double>(deg));
    }
    w.row_standardized = true;
}

bool rings_touch(const geo::Ring& a, const geo::Ring& b, double snap_eps) {
    const double eps2 = snap_eps * snap_eps;
    for (const geo::PlanarPoint& p : a) {
        for (const geo::PlanarPoint& q : b) {
            double dx = p.x - q.x, dy = p.y - q.y;
            if (dx * dx + dy * dy <= eps2) return true;
        }
    }
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            if (geo::segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
    return false;
}

bool groups_touch(const std::vector<Neighborhood>& hoods, const HoodGroup& ga,
                  const HoodGroup& gb, double snap_eps) {
    for (int pa : ga.parts) {
        const geo::Polygon& a = hoods[pa].boundary;
        geo::Bounds ba = a.bounds();
        for (int pb : gb.parts) {
            const geo::Polygon& b = hoods[pb].boundary;
            if (!ba.overlaps(b.bounds(), snap_eps)) continue;
            if (rings_touch(a.exterior, b.exterior, snap_eps)) return true;
        }
    }
    return false;
}

}  // namespace

SpatialWeights build_queen_weights(const std::vector<Neighborhood>& hoods,
                                   const std::vector<HoodGroup>& groups,
                                   double snap_eps) {
    SpatialWeights w;
    w.n = static_cast<int>(groups.size());
    w.neighbors.assign(groups.size(), {});
    for (int i = 0; i < w.n; ++i) {
        for (int j = i + 1; j < w.n; ++j) {
            if (groups_touch(hoods, groups[i], groups[j], snap_eps)) {
                w.neighbors[i].push_back(j);
                w.neighbors[j].push_back(i);
            }
        }
    }
    for (auto& row : w.neighbors) std::sort(row.begin(), row.end());
    row_standardize(w);
    return w;
}

SpatialWeights build_knn_weights(const std::vector<Neighborhood>& hoods,
                                 const std::vector<HoodGroup>& groups, int k) {
    const int n = static_cast<int>(groups.size());
    if (k < 1) throw ConfigError("knn weights need k >= 1");
    if (k >= n)
        throw ConfigError("knn weights need k < number of neighborhoods (" +
                          std::to_string(n) + ")");

    std::vector<geo::PlanarPoint> centers(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double ax = 0.0, ay = 0.0, atotal = 0.0;
        for (int part : groups[g].parts) {
            const geo::Polygon& poly = hoods[part].boundary;
            double a = geo::area(poly);
            if (!(a > 0.0)) continue;  // degenerate part, carries no weight
            geo::PlanarPoint c = geo::centroid(poly);
            ax += a * c.x;
            ay += a * c.y;
            atotal += a;
        }
        if (!(atotal > 0.0))
            throw ComputeError("neighborhood " + std::to_string(groups[g].id) +
                               " has zero area");
        centers[g] = {ax / atotal, ay / atotal};
    }

    SpatialWeights w;
    w.n = n;
    w.neighbors.assign(groups.size(), {});
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < n; ++i) {
        order.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dx = centers[j].x - centers[i].x;
            double dy = centers[j].y - centers[i].y;
            order.emplace_back(dx * dx + dy * dy, j);
        }
        std::sort(order.begin(), order.end());
        for (int t = 0; t < k; ++t) w.neighbors[i].push_back(order[t].second);
        std::sort(w.neighbors[i].begin(), w.neighbors[i].end());
    }
    row_standardize(w);
    return w;
}

SpatialWeights build_weights(const std::vector<Neighborhood>& hoods,
                             const std::vector<HoodGroup>& groups,
                             const WeightScheme& scheme) {
    if (scheme.kind == WeightScheme::Kind::knn)
        return build_knn_weights(hoods, groups, scheme.k);
    return build_queen_weights(hoods, groups, scheme.snap_eps);
}

const char* quadrant_label(Quadrant q) {
    switch (q) {
        case Quadrant::HH: return "HH";
        case Quadrant::LL: return "LL";
        case Quadrant::LH: return "LH";
        case Quadrant::HL: return "HL";
        case Quadrant::NS: return "NS";
        case Quadrant::ISOLATE: return "ISOLATE";
    }
    return "NS";
}

LisaStats local_morans_i(const std::vector<double>& values, const SpatialWeights& w,
                         bool anselin) {
    const int n = static_cast<int>(values.size());
    if (n != w.n) throw ComputeError("value count does not match weight matrix");
    if (n < 3) throw ComputeError("local Moran's I needs at least 3 observations");

    LisaStats s;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    s.z.resize(n);
    for (int i = 0; i < n; ++i) s.z[i] = values[i] - mean;
    double ss = 0.0;
    for (double z : s.z) ss += z * z;
    s.m2 = ss / n;

    s.lag.assign(n, 0.0);
    s.local_i.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double lag = 0.0;
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t)
            lag += w.weights[i][t] * s.z[w.neighbors[i][t]];
        s.lag[i] = lag;
        if (s.m2 > 0.0) s.local_i[i] = anselin ? s.z[i] * lag / s.m2 : s.z[i] * lag;
    }
    s.global_i = global_morans_i(values, w);
    return s;
}

double global_morans_i(const std::vector<double>& values, const SpatialWeights& w) {
    const int n = static_cast<int>(values.size());
    if (n != w.n) throw ComputeError("value count does not match weight matrix");
    if (n == 0) throw ComputeError("no observations");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0, cross = 0.0;
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) {
        z[i] = values[i] - mean;
        ss += z[i] * z[i];
    }
    for (int i = 0; i < n; ++i) {
        double lag = 0.0;
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t)
            lag += w.weights[i][t] * z[w.neighbors[i][t]];
        cross += z[i] * lag;
    }
    double s0 = w.s0();
    if (!(s0 > 0.0) || !(ss > 0.0)) return 0.0;
    return (n / s0) * cross / ss;
}

std::vector<double> permutation_p(const std::vector<double>& values,
                                  const SpatialWeights& w, const LisaStats& stats,
                                  int n_perm, std::uint64_t seed, int workers) {
    const int n = static_cast<int>(values.size());
    if (n != w.n) throw ComputeError("value count does not match weight matrix");
    if (n_perm < 1) throw ConfigError("permutation count must be positive");

    std::vector<double> p(n, 1.0);
    if (stats.m2 <= 0.0) return p;

    // Observation i is a self-contained job on its own RNG stream, so the
    // dispatch order across threads cannot change any p-value.
    auto run_one = [&](int i, std::vector<int>& pool, std::vector<int>& picks) {
        const int deg = static_cast<int>(w.neighbors[i].size());
        if (deg == 0) return;  // isolates keep p = 1

        pool.clear();
        pool.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) pool.push_back(j);

        auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(i));
        const double obs = std::abs(stats.local_i[i]);
        int hits = 0;
        picks.resize(deg);
        for (int rep = 0; rep < n_perm; ++rep) {
            // Partial Fisher-Yates: the first deg slots become the draw,
            // then the swaps are undone in reverse to restore the pool.
            for (int t = 0; t < deg; ++t) {
                int j = t + static_cast<int>(rng::uniform_below(
                                gen, static_cast<std::uint64_t>(n - 1 - t)));
                std::swap(pool[t], pool[j]);
                picks[t] = j;
            }
            double lag = 0.0;
            for (int t = 0; t < deg; ++t) lag += w.weights[i][t] * stats.z[pool[t]];
            double sim = stats.z[i] * lag / stats.m2;
            if (std::abs(sim) >= obs) ++hits;
            for (int t = deg - 1; t >= 0; --t) std::swap(pool[t], pool[picks[t]]);
        }
        p[i] = static_cast<double>(hits + 1) / static_cast<double>(n_perm + 1);
    };

    int nw = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    nw = std::clamp(nw, 1, n);
    if (nw == 1) {
        std::vector<int> pool, picks;
        for (int i = 0; i < n; ++i) run_one(i, pool, picks);
        return p;
    }

    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    threads.reserve(nw);
    for (int t = 0; t < nw; ++t) {
        threads.emplace_back([&]() {
            std::vector<int> pool, picks;
            for (;;) {
                int i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                run_one(i, pool, picks);
            }
        });
    }
    for (auto& th : threads) th.join();
    return p;
}

Quadrant classify(double z, double lag, double p, double alpha, bool is_isolate) {
    if (is_isolate) return Quadrant::ISOLATE;
    if (p > alpha) return Quadrant::NS;
    if (z == 0.0 || lag == 0.0) return Quadrant::NS;
    if (z > 0.0) return lag > 0.0 ? Quadrant::HH : Quadrant::HL;
    return lag < 0.0 ? Quadrant::LL : Quadrant::LH;
}

LisaResult run_lisa(const Raster& surface, const std::vector<Neighborhood>& hoods,
                    const std::vector<HoodGroup>& groups, const WeightScheme& scheme,
                    int n_perm, std::uint64_t seed, double alpha, int workers) {
    AggregateResult agg = aggregate(surface, hoods, groups);

    LisaResult r;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (agg.cells[g] == 0) {
            r.excluded.push_back(groups[g].id);
            continue;
        }
        r.groups.push_back(groups[g]);
        r.value.push_back(agg.value[g]);
        r.cells.push_back(agg.cells[g]);
    }
    if (r.groups.size() < 3)
        throw ComputeError("fewer than 3 neighborhoods cover any raster cells");

    SpatialWeights w = build_weights(hoods, r.groups, scheme);
    r.stats = local_morans_i(r.value, w, true);
    r.p_value = permutation_p(r.value, w, r.stats, n_perm, seed, workers);
    r.quadrant.resize(r.groups.size());
    for (std::size_t i = 0; i < r.groups.size(); ++i)
        r.quadrant[i] = classify(r.stats.z[i], r.stats.lag[i], r.p_value[i], alpha,
                                 w.isolate(static_cast<int>(i)));
    return r;
}

void write_lisa_csv(const LisaResult& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ComputeError("cannot write " + path.string());
    out << "id,name,value,z,lag,local_i,p_value,quadrant\n";
    for (std::size_t i = 0; i < r.groups.size(); ++i) {
        out << r.groups[i].id << ',' << r.groups[i].name << ','
            << format_double(r.value[i]) << ',' << format_double(r.stats.z[i])
            << ',' << format_double(r.stats.lag[i]) << ','
            << format_double(r.stats.local_i[i]) << ','
            << format_double(r.p_value[i]) << ',' << quadrant_label(r.quadrant[i])
            << "\n";
    }
    if (!out) throw ComputeError("write failed for " + path.string());
}

namespace {

nlohmann::ordered_json ring_coords(const geo::Ring& ring, const geo::GeoPoint& origin) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const geo::PlanarPoint& p : ring) {
        geo::GeoPoint g = geo::unproject(p, origin);
        arr.push_back({g.lon, g.lat});
    }
    return arr;
}

nlohmann::ordered_json polygon_coords(const geo::Polygon& poly,
                                      const geo::GeoPoint& origin) {
    nlohmann::ordered_json rings = nlohmann::ordered_json::array();
    rings.push_back(ring_coords(poly.exterior, origin));
    for (const geo::Ring& hole : poly.holes) rings.push_back(ring_coords(hole, origin));
    return rings;
}

}  // namespace

void write_lisa_geojson(const LisaResult& r, const std::vector<Neighborhood>& hoods,
                        const geo::GeoPoint& origin,
                        const std::filesystem::path& path) {
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.groups.size(); ++i) {
        const HoodGroup& g = r.groups[i];
        nlohmann::ordered_json geom;
        if (g.parts.size() == 1) {
            geom["type"] = "Polygon";
            geom["coordinates"] = polygon_coords(hoods[g.parts[0]].boundary, origin);
        } else {
            geom["type"] = "MultiPolygon";
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (int part : g.parts)
                parts.push_back(polygon_coords(hoods[part].boundary, origin));
            geom["coordinates"] = parts;
        }
        nlohmann::ordered_json props;
        props["id"] = g.id;
        props["name"] = g.name;
        props["value"] = r.value[i];
        props["z"] = r.stats.z[i];
        props["lag"] = r.stats.lag[i];
        props["local_i"] = r.stats.local_i[i];
        props["p_value"] = r.p_value[i];
        props["quadrant"] = quadrant_label(r.quadrant[i]);
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["properties"] = std::move(props);
        feature["geometry"] = std::move(geom);
        features.push_back(std::move(feature));
    }
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ComputeError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw ComputeError("write failed for " + path.string());
}

}  // namespace resil
