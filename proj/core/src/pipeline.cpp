#include "resil/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "resil/catchment.hpp"
#include "resil/errors.hpp"
#include "resil/hash.hpp"
#include "resil/ingest.hpp"
#include "resil/table.hpp"
#include "resil/version.hpp"

namespace resil {

namespace fs = std::filesystem;

namespace {

fs::path resolve_rel(const fs::path& base, const std::string& p) {
    fs::path out(p);
    return out.is_absolute() ? out : base / out;
}

std::uint64_t get_u64_or(const TableSection& sec, const std::string& key,
                         std::uint64_t fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
        throw ConfigError("section [" + sec.name + "] key '" + key +
                          "': expected an unsigned integer, got '" + *v + "'");
    return out;
}

// Removes everything tracked unless commit() ran, so a failed stage leaves
// no partial outputs behind.
struct OutputGuard {
    std::vector<fs::path> files;
    bool committed = false;

    void track(const fs::path& p) { files.push_back(p); }
    void track_pgm(const fs::path& p) {
        files.push_back(p);
        files.push_back(p.string() + ".txt");
    }
    void commit() { committed = true; }
    ~OutputGuard() {
        if (committed) return;
        for (const fs::path& p : files) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

struct LoadedStructures {
    Ontology ontology;
    std::vector<SocialStructure> structures;
    std::vector<std::string> warnings;
    geo::GeoPoint origin{0.0, 0.0};
};

LoadedStructures load_projected(const RunConfig& cfg) {
    LoadedStructures out;
    out.ontology = load_ontology(cfg.ontology);
    out.structures =
        load_structures(cfg.structures, out.ontology, cfg.permissive, &out.warnings);
    if (out.structures.empty())
        throw IngestError(cfg.structures.string() + ": no usable structures");
    out.origin = cfg.origin ? *cfg.origin : mean_location(out.structures);
    project_structures(out.structures, out.origin);
    return out;
}

// Catchments in structure order, each over its category's radius.
std::vector<CatchmentResult> resolve_catchments(
    const std::vector<SocialStructure>& structures, const Ontology& ontology,
    const Raster& population, const Raster* group) {
    std::vector<CatchmentResult> out;
    out.reserve(structures.size());
    for (const SocialStructure& s : structures) {
        const CategorySpec& cat = ontology.require(s.category);
        CatchmentResult c =
            catchment_population(population, group, s.position, cat.catchment_radius);
        c.structure_id = s.id;
        out.push_back(std::move(c));
    }
    return out;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& log) {
    for (const std::string& w : warnings) log << "warning: " << w << "\n";
}

std::string utc_now_iso() {
    std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    Table t = load_table(path);
    RunConfig cfg;
    cfg.config_path = path;
    fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

    const TableSection& in = t.require("inputs");
    cfg.structures = resolve_rel(dir, in.get("structures"));
    cfg.neighborhoods = resolve_rel(dir, in.get("neighborhoods"));
    cfg.population = resolve_rel(dir, in.get("population"));
    if (in.has("group")) cfg.group = resolve_rel(dir, in.get("group"));
    cfg.ontology = resolve_rel(dir, in.get("ontology"));

    std::vector<fs::path> required = {cfg.structures, cfg.neighborhoods,
                                      cfg.population, cfg.ontology};
    if (cfg.group) required.push_back(*cfg.group);
    for (const fs::path& p : required)
        if (!fs::exists(p))
            throw ConfigError(path.string() + ": input file not found: " + p.string());

    if (const TableSection* run = t.find("run")) {
        bool has_lon = run->has("origin_lon");
        bool has_lat = run->has("origin_lat");
        if (has_lon != has_lat)
            throw ConfigError(path.string() +
                              ": origin_lon and origin_lat must appear together");
        if (has_lon) {
            geo::GeoPoint o{run->get_double("origin_lon"),
                            run->get_double("origin_lat")};
            if (!geo::valid_coordinates(o))
                throw ConfigError(path.string() + ": origin out of range");
            cfg.origin = o;
        }
        cfg.seed = get_u64_or(*run, "seed", cfg.seed);
        cfg.n_perm = static_cast<int>(run->get_int_or("n_perm", cfg.n_perm));
        if (cfg.n_perm < 99)
            throw ConfigError(path.string() + ": n_perm must be at least 99");
        cfg.alpha_map = run->get_double_or("alpha_map", cfg.alpha_map);
        if (!(cfg.alpha_map > 0.0 && cfg.alpha_map < 1.0))
            throw ConfigError(path.string() + ": alpha_map must lie in (0, 1)");
        cfg.alpha_report = run->get_double_or("alpha_report", cfg.alpha_report);
        if (!(cfg.alpha_report > 0.0 && cfg.alpha_report < 1.0))
            throw ConfigError(path.string() + ": alpha_report must lie in (0, 1)");
        cfg.workers = static_cast<int>(run->get_int_or("workers", cfg.workers));
        if (cfg.workers < 0)
            throw ConfigError(path.string() + ": workers must be >= 0");
        cfg.truncation = run->get_double_or("truncation", cfg.truncation);
        if (!(cfg.truncation > 0.0))
            throw ConfigError(path.string() + ": truncation must be positive");
        cfg.population_floor =
            run->get_double_or("population_floor", cfg.population_floor);
        if (!(cfg.population_floor > 0.0))
            throw ConfigError(path.string() + ": population_floor must be positive");
        cfg.permissive = run->get_bool_or("permissive", cfg.permissive);
        cfg.out_dir = fs::path(run->get_or("out", cfg.out_dir.string()));
    }

    if (const TableSection* w = t.find("weights")) {
        std::string kind = w->get_or("kind", "queen");
        if (kind == "queen") {
            cfg.weights.kind = WeightScheme::Kind::queen;
        } else if (kind == "knn") {
            cfg.weights.kind = WeightScheme::Kind::knn;
        } else {
            throw ConfigError(path.string() + ": weights kind must be queen or knn");
        }
        cfg.weights.k = static_cast<int>(w->get_int_or("k", cfg.weights.k));
        if (cfg.weights.k < 1) throw ConfigError(path.string() + ": k must be >= 1");
        cfg.weights.snap_eps = w->get_double_or("snap_eps", cfg.weights.snap_eps);
        if (!(cfg.weights.snap_eps > 0.0))
            throw ConfigError(path.string() + ": snap_eps must be positive");
    }
    return cfg;
}

void stage_validate(const RunConfig& cfg, std::ostream& log) {
    LoadedStructures ls = load_projected(cfg);
    print_warnings(ls.warnings, log);
    log << "validate: ontology " << cfg.ontology.filename().string() << " ("
        << ls.ontology.categories.size() << " categories, "
        << ls.ontology.layer_order().size() << " layers)\n";
    log << "validate: " << ls.structures.size() << " structures, origin "
        << format_double(ls.origin.lon) << "," << format_double(ls.origin.lat) << "\n";

    std::vector<Neighborhood> hoods = load_neighborhoods(cfg.neighborhoods, ls.origin);
    std::vector<HoodGroup> groups = group_by_id(hoods);
    log << "validate: " << groups.size() << " neighborhoods (" << hoods.size()
        << " parts)\n";

    Raster pop = load_population(cfg.population);
    log << "validate: population grid " << pop.header.ncols << "x" << pop.header.nrows
        << ", cellsize " << format_double(pop.header.cellsize) << "\n";
    std::optional<Raster> grp;
    if (cfg.group) {
        grp = load_group_fraction(*cfg.group, pop.header);
        log << "validate: group raster aligned\n";
    }

    std::vector<CatchmentResult> catchments =
        resolve_catchments(ls.structures, ls.ontology, pop, grp ? &*grp : nullptr);
    int empty = 0;
    for (const CatchmentResult& c : catchments) empty += c.zero_population;
    if (empty)
        log << "validate: " << empty << " structures with zero catchment population\n";

    SpatialWeights w = build_weights(hoods, groups, cfg.weights);
    int isolates = 0;
    for (int i = 0; i < w.n; ++i)
        if (w.isolate(i)) ++isolates;
    log << "validate: weights "
        << (cfg.weights.kind == WeightScheme::Kind::queen ? "queen" : "knn") << ", s0 "
        << format_double(w.s0()) << ", isolates " << isolates << "\n";
    log << "validate: ok\n";
}

void stage_layers(const RunConfig& cfg, std::ostream& log) {
    LoadedStructures ls = load_projected(cfg);
    print_warnings(ls.warnings, log);
    Raster pop = load_population(cfg.population);
    std::optional<Raster> grp;
    if (cfg.group) grp = load_group_fraction(*cfg.group, pop.header);

    std::vector<CatchmentResult> catchments =
        resolve_catchments(ls.structures, ls.ontology, pop, grp ? &*grp : nullptr);

    fs::create_directories(cfg.out_dir);
    OutputGuard guard;
    fs::path catchment_path = cfg.out_dir / "catchments.csv";
    guard.track(catchment_path);
    write_catchment_csv(catchments, catchment_path);

    LayerSet layers = build_layers(ls.structures, ls.ontology, catchments, pop.header,
                                   cfg.truncation, cfg.workers, cfg.population_floor);
    for (const DensityLayer& layer : layers.layers) {
        fs::path bridging = cfg.out_dir / ("layer_" + layer.layer_name + "_bridging.asc");
        fs::path bonding = cfg.out_dir / ("layer_" + layer.layer_name + "_bonding.asc");
        fs::path combined = cfg.out_dir / ("layer_" + layer.layer_name + ".asc");
        fs::path heatmap = cfg.out_dir / ("layer_" + layer.layer_name + ".pgm");
        guard.track(bridging);
        write_ascii_grid(layer.bridging_part, bridging);
        guard.track(bonding);
        write_ascii_grid(layer.bonding_part, bonding);
        guard.track(combined);
        write_ascii_grid(layer.grid, combined);
        guard.track_pgm(heatmap);
        write_pgm(layer.grid, heatmap, PgmScale::diverging);
    }
    guard.commit();
    log << "layers: rendered " << layers.layers.size() << " layers from "
        << ls.structures.size() << " structures\n";
}

void stage_fuse(const RunConfig& cfg, std::ostream& log) {
    Ontology ont = load_ontology(cfg.ontology);

    LayerSet set;
    bool first = true;
    for (const std::string& name : ont.layer_order()) {
        DensityLayer layer;
        layer.layer_name = name;
        layer.bridging_part =
            read_ascii_grid(cfg.out_dir / ("layer_" + name + "_bridging.asc"));
        layer.bonding_part =
            read_ascii_grid(cfg.out_dir / ("layer_" + name + "_bonding.asc"));
        if (first) {
            set.header = layer.bridging_part.header;
            first = false;
        }
        if (!layer.bridging_part.header.same_grid(set.header) ||
            !layer.bonding_part.header.same_grid(set.header))
            throw IngestError("layer '" + name + "' grids do not align across parts");
        set.layers.push_back(std::move(layer));
    }

    SocialCapitalSurface fused = fuse(set, ont);
    fs::create_directories(cfg.out_dir);
    OutputGuard guard;
    const std::pair<const char*, const Raster*> surfaces[] = {
        {"social_capital_total", &fused.total},
        {"social_capital_bridging", &fused.bridging},
        {"social_capital_bonding", &fused.bonding}};
    for (const auto& [name, raster] : surfaces) {
        fs::path asc = cfg.out_dir / (std::string(name) + ".asc");
        fs::path pgm = cfg.out_dir / (std::string(name) + ".pgm");
        guard.track(asc);
        write_ascii_grid(*raster, asc);
        guard.track_pgm(pgm);
        write_pgm(*raster, pgm, PgmScale::diverging);
    }
    guard.commit();
    log << "fuse: " << set.layers.size()
        << " layers -> total, bridging, bonding surfaces\n";
}

void stage_lisa(const RunConfig& cfg, std::ostream& log) {
    LoadedStructures ls = load_projected(cfg);
    std::vector<Neighborhood> hoods = load_neighborhoods(cfg.neighborhoods, ls.origin);
    std::vector<HoodGroup> groups = group_by_id(hoods);
    Raster total = read_ascii_grid(cfg.out_dir / "social_capital_total.asc");

    LisaResult r = run_lisa(total, hoods, groups, cfg.weights, cfg.n_perm, cfg.seed,
                            cfg.alpha_map, cfg.workers);
    for (long long id : r.excluded) {
        for (const HoodGroup& g : groups) {
            if (g.id != id) continue;
            log << "warning: neighborhood " << id << " (" << g.name
                << ") covers no raster cells; excluded from clustering\n";
            break;
        }
    }

    OutputGuard guard;
    fs::path csv = cfg.out_dir / "lisa.csv";
    guard.track(csv);
    write_lisa_csv(r, csv);
    fs::path gj = cfg.out_dir / "lisa.geojson";
    guard.track(gj);
    write_lisa_geojson(r, hoods, ls.origin, gj);
    guard.commit();

    int hh = 0, ll = 0;
    for (Quadrant q : r.quadrant) {
        hh += q == Quadrant::HH;
        ll += q == Quadrant::LL;
    }
    log << "lisa: global I " << format_double(r.stats.global_i) << ", " << hh
        << " HH, " << ll << " LL of " << r.groups.size() << " (alpha "
        << format_double(cfg.alpha_map) << ", " << cfg.n_perm << " permutations)\n";
}

namespace {

struct LisaCsvRow {
    std::string id;
    std::string name;
    double p = 1.0;
    std::string quadrant;
};

std::vector<LisaCsvRow> read_lisa_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string() + " (run lisa first)");
    std::string line;
    if (!std::getline(in, line) ||
        line != "id,name,value,z,lag,local_i,p_value,quadrant")
        throw IngestError(path.string() + ": unexpected header");
    std::vector<LisaCsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 8)
            throw IngestError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 8 columns");
        LisaCsvRow row;
        row.id = fields[0];
        row.name = fields[1];
        const std::string& praw = fields[6];
        auto [ptr, ec] =
            std::from_chars(praw.data(), praw.data() + praw.size(), row.p);
        if (ec != std::errc() || ptr != praw.data() + praw.size())
            throw IngestError(path.string() + ":" + std::to_string(lineno) +
                              ": bad p_value '" + praw + "'");
        row.quadrant = fields[7];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void stage_report(const RunConfig& cfg, std::ostream& log) {
    std::vector<LisaCsvRow> rows = read_lisa_csv(cfg.out_dir / "lisa.csv");

    std::vector<std::string> stable, feral;
    for (const LisaCsvRow& r : rows) {
        if (r.p > cfg.alpha_report) continue;
        std::string cell = r.id + ": " + r.name + " (" + r.quadrant +
                           ", p = " + format_double(r.p) + ")";
        if (r.quadrant == "HH") stable.push_back(cell);
        if (r.quadrant == "LL") feral.push_back(cell);
    }

    OutputGuard guard;
    fs::path path = cfg.out_dir / "report.md";
    guard.track(path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ComputeError("cannot write " + path.string());
    out << "# Neighborhood social capital clusters\n\n";
    out << "Statistically significant high and low relative social capital "
           "neighborhoods with p-value <= "
        << format_double(cfg.alpha_report) << " (" << cfg.n_perm
        << " conditional permutations, seed " << cfg.seed << ").\n\n";
    out << "| Stable (High-High) Neighborhood | Feral (Low-Low) Neighborhood |\n";
    out << "| --- | --- |\n";
    std::size_t n = std::max(stable.size(), feral.size());
    for (std::size_t i = 0; i < n; ++i) {
        out << "| " << (i < stable.size() ? stable[i] : "") << " | "
            << (i < feral.size() ? feral[i] : "") << " |\n";
    }
    out << "\n" << stable.size() << " High-High and " << feral.size()
        << " Low-Low of " << rows.size() << " neighborhoods analyzed.\n";
    if (!out) throw ComputeError("write failed for " + path.string());
    guard.commit();
    log << "report: " << stable.size() << " stable, " << feral.size() << " feral\n";
}

namespace {

template <class Fn>
void named_stage(const char* name, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const IngestError& e) {
        throw IngestError(std::string(name) + ": " + e.what());
    } catch (const ComputeError& e) {
        throw ComputeError(std::string(name) + ": " + e.what());
    }
}

nlohmann::ordered_json file_entry(const fs::path& path, const std::string& name) {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["sha256"] = sha256_hex_file(path);
    j["bytes"] = static_cast<std::uint64_t>(fs::file_size(path));
    return j;
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& log) {
    using clock = std::chrono::steady_clock;
    std::vector<std::pair<std::string, double>> timings;
    auto timed = [&](const char* name, auto&& fn) {
        auto t0 = clock::now();
        named_stage(name, fn);
        std::chrono::duration<double, std::milli> dt = clock::now() - t0;
        timings.emplace_back(name, dt.count());
    };

    timed("validate", [&] { stage_validate(cfg, log); });
    timed("layers", [&] { stage_layers(cfg, log); });
    timed("fuse", [&] { stage_fuse(cfg, log); });
    timed("lisa", [&] { stage_lisa(cfg, log); });
    timed("report", [&] { stage_report(cfg, log); });

    named_stage("manifest", [&] {
        LoadedStructures ls = load_projected(cfg);
        std::vector<Neighborhood> hoods =
            load_neighborhoods(cfg.neighborhoods, ls.origin);
        std::vector<HoodGroup> groups = group_by_id(hoods);
        Raster pop = load_population(cfg.population);
        std::optional<Raster> grp;
        if (cfg.group) grp = load_group_fraction(*cfg.group, pop.header);
        std::vector<CatchmentResult> catchments =
            resolve_catchments(ls.structures, ls.ontology, pop, grp ? &*grp : nullptr);

        nlohmann::ordered_json m;
        m["tool"] = kToolName;
        m["version"] = kVersion;
        m["created_utc"] = utc_now_iso();

        nlohmann::ordered_json config;
        config["seed"] = cfg.seed;
        config["n_perm"] = cfg.n_perm;
        config["alpha_map"] = cfg.alpha_map;
        config["alpha_report"] = cfg.alpha_report;
        config["workers"] = cfg.workers;
        config["truncation"] = cfg.truncation;
        config["population_floor"] = cfg.population_floor;
        config["permissive"] = cfg.permissive;
        config["origin"] = {{"lon", ls.origin.lon}, {"lat", ls.origin.lat}};
        nlohmann::ordered_json weights;
        if (cfg.weights.kind == WeightScheme::Kind::queen) {
            weights["kind"] = "queen";
            weights["snap_eps"] = cfg.weights.snap_eps;
        } else {
            weights["kind"] = "knn";
            weights["k"] = cfg.weights.k;
        }
        config["weights"] = weights;
        config["out"] = cfg.out_dir.string();
        m["config"] = config;

        m["structures"] = ls.structures.size();
        m["neighborhoods"] = groups.size();
        m["neighborhood_parts"] = hoods.size();
        nlohmann::ordered_json flagged = nlohmann::ordered_json::array();
        for (const CatchmentResult& c : catchments)
            if (c.zero_population) flagged.push_back(c.structure_id);
        m["zero_population_structures"] = flagged;

        nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
        inputs.push_back(file_entry(cfg.config_path, cfg.config_path.filename().string()));
        inputs.push_back(file_entry(cfg.ontology, cfg.ontology.filename().string()));
        inputs.push_back(
            file_entry(cfg.structures, cfg.structures.filename().string()));
        inputs.push_back(
            file_entry(cfg.neighborhoods, cfg.neighborhoods.filename().string()));
        inputs.push_back(
            file_entry(cfg.population, cfg.population.filename().string()));
        if (cfg.group)
            inputs.push_back(file_entry(*cfg.group, cfg.group->filename().string()));
        m["inputs"] = inputs;

        std::vector<std::string> names = {"catchments.csv"};
        for (const std::string& layer : ls.ontology.layer_order()) {
            names.push_back("layer_" + layer + "_bridging.asc");
            names.push_back("layer_" + layer + "_bonding.asc");
            names.push_back("layer_" + layer + ".asc");
            names.push_back("layer_" + layer + ".pgm");
            names.push_back("layer_" + layer + ".pgm.txt");
        }
        for (const char* s :
             {"social_capital_total", "social_capital_bridging",
              "social_capital_bonding"}) {
            names.push_back(std::string(s) + ".asc");
            names.push_back(std::string(s) + ".pgm");
            names.push_back(std::string(s) + ".pgm.txt");
        }
        names.push_back("lisa.csv");
        names.push_back("lisa.geojson");
        names.push_back("report.md");
        nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
        for (const std::string& name : names)
            outputs.push_back(file_entry(cfg.out_dir / name, name));
        m["outputs"] = outputs;

        nlohmann::ordered_json t;
        for (const auto& [name, ms] : timings) t[name] = ms;
        m["timings_ms"] = t;

        fs::path tmp = cfg.out_dir / "manifest.json.tmp";
        OutputGuard guard;
        guard.track(tmp);
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw ComputeError("cannot write " + tmp.string());
            out << m.dump(2) << "\n";
            if (!out) throw ComputeError("write failed for " + tmp.string());
        }
        fs::rename(tmp, cfg.out_dir / "manifest.json");
        guard.commit();
    });
    log << "run: complete, manifest written\n";
}

}  // namespace resil
