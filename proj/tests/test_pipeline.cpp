#include <doctest.h>
#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "resil/errors.hpp"
#include "resil/hash.hpp"
#include "resil/pipeline.hpp"
#include "resil/raster.hpp"
#include "test_util.hpp"

using namespace resil;
namespace fs = std::filesystem;
using testutil::read_file;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::string ascii_grid_text(int ncols, int nrows, double xll, double yll,
                            double cellsize, const std::string& value) {
    std::ostringstream out;
    out << "ncols " << ncols << "\nnrows " << nrows << "\nxllcorner " << xll
        << "\nyllcorner " << yll << "\ncellsize " << cellsize
        << "\nnodata_value -9999\n";
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) out << (c ? " " : "") << value;
        out << "\n";
    }
    return out.str();
}

// A 3x3 ward grid over a 34x34 population raster with a west-to-east capacity
// gradient, one restricted mosque, and one market far outside the raster.
void write_city(const fs::path& dir, bool extra_offshore_hood = false,
                double raster_xll = 0.0) {
    using nlohmann::ordered_json;

    ordered_json structures;
    structures["type"] = "FeatureCollection";
    structures["features"] = ordered_json::array();
    auto add_point = [&](const std::string& id, const std::string& category,
                         double lon, double lat, double capacity,
                         const char* access, const char* group) {
        ordered_json f;
        f["type"] = "Feature";
        f["properties"]["id"] = id;
        f["properties"]["category"] = category;
        f["properties"]["capacity"] = capacity;
        if (access) f["properties"]["access"] = access;
        if (group) f["properties"]["group"] = group;
        f["geometry"]["type"] = "Point";
        f["geometry"]["coordinates"] = {lon, lat};
        structures["features"].push_back(f);
    };
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            add_point("m" + std::to_string(j * 3 + i + 1), "market",
                      106.805 + 0.01 * i, -6.195 + 0.01 * j,
                      100.0 + 2000.0 * i, "open", nullptr);
    add_point("q1", "mosque", 106.8156, -6.1844, 300.0, "restricted", "santri");
    add_point("m_off", "market", 106.9, -6.185, 100.0, nullptr, nullptr);
    write_file(dir / "structures.geojson", structures.dump(2) + "\n");

    ordered_json hoods;
    hoods["type"] = "FeatureCollection";
    hoods["features"] = ordered_json::array();
    auto add_ward = [&](long long id, const std::string& name, double lon0,
                        double lat0, double dlon, double dlat) {
        ordered_json f;
        f["type"] = "Feature";
        f["properties"]["id"] = id;
        f["properties"]["name"] = name;
        f["geometry"]["type"] = "Polygon";
        f["geometry"]["coordinates"] = {{{lon0, lat0},
                                         {lon0 + dlon, lat0},
                                         {lon0 + dlon, lat0 + dlat},
                                         {lon0, lat0 + dlat},
                                         {lon0, lat0}}};
        hoods["features"].push_back(f);
    };
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            add_ward(j * 3 + i + 1, "ward " + std::to_string(j * 3 + i + 1),
                     106.8 + 0.01 * i, -6.2 + 0.01 * j, 0.01, 0.01);
    if (extra_offshore_hood)
        add_ward(10, "offshore ward", 106.88, -6.19, 0.01, 0.01);
    write_file(dir / "neighborhoods.geojson", hoods.dump(2) + "\n");

    write_file(dir / "population.asc",
               ascii_grid_text(34, 34, raster_xll, 0.0, 100.0, "50"));
    write_file(dir / "group.asc",
               ascii_grid_text(34, 34, raster_xll, 0.0, 100.0, "0.25"));

    write_file(dir / "ontology.ini",
               "[ontology]\n"
               "modifier = linear\n"
               "groups = santri\n"
               "\n"
               "[mosque]\n"
               "layer = worship\n"
               "weight = 0.7\n"
               "bandwidth = 500\n"
               "catchment_radius = 700\n"
               "default_capacity = 300\n"
               "capital_kind = bonding\n"
               "\n"
               "[market]\n"
               "layer = community\n"
               "weight = 0.4\n"
               "bandwidth = 400\n"
               "catchment_radius = 500\n"
               "default_capacity = 500\n"
               "\n"
               "[layer_weights]\n"
               "worship = 1.0\n"
               "community = 0.8\n");

    write_file(dir / "run.ini",
               "[inputs]\n"
               "structures = structures.geojson\n"
               "neighborhoods = neighborhoods.geojson\n"
               "population = population.asc\n"
               "group = group.asc\n"
               "ontology = ontology.ini\n"
               "\n"
               "[run]\n"
               "origin_lon = 106.8\n"
               "origin_lat = -6.2\n"
               "seed = 7\n"
               "n_perm = 99\n"
               "alpha_map = 0.05\n"
               "alpha_report = 0.05\n"
               "workers = 2\n"
               "\n"
               "[weights]\n"
               "kind = queen\n");
}

// name -> bytes for every regular file directly inside dir
std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file())
            out[entry.path().filename().string()] = read_file(entry.path());
    return out;
}

const std::vector<std::string> kExpectedOutputs = {
    "catchments.csv",
    "layer_worship_bridging.asc",
    "layer_worship_bonding.asc",
    "layer_worship.asc",
    "layer_worship.pgm",
    "layer_worship.pgm.txt",
    "layer_community_bridging.asc",
    "layer_community_bonding.asc",
    "layer_community.asc",
    "layer_community.pgm",
    "layer_community.pgm.txt",
    "social_capital_total.asc",
    "social_capital_total.pgm",
    "social_capital_total.pgm.txt",
    "social_capital_bridging.asc",
    "social_capital_bridging.pgm",
    "social_capital_bridging.pgm.txt",
    "social_capital_bonding.asc",
    "social_capital_bonding.pgm",
    "social_capital_bonding.pgm.txt",
    "lisa.csv",
    "lisa.geojson",
    "report.md",
};

int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* cli = std::getenv("RESIL_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "RESIL_CLI must point at the resil-fuse binary");
    static std::atomic<int> counter{0};
    fs::path cap = fs::temp_directory_path() /
                   ("resil-cli-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(0x1)) + ".txt");
    std::string cmd = std::string("\"") + cli + "\" " + args + " > \"" +
                      cap.string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) *output = read_file(cap);
    std::error_code ec;
    fs::remove(cap, ec);
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("run config defaults") {
    TempDir dir;
    write_city(dir.path());
    write_file(dir / "min.ini",
               "[inputs]\n"
               "structures = structures.geojson\n"
               "neighborhoods = neighborhoods.geojson\n"
               "population = population.asc\n"
               "ontology = ontology.ini\n");
    RunConfig cfg = load_run_config(dir / "min.ini");
    CHECK(!cfg.origin.has_value());
    CHECK(!cfg.group.has_value());
    CHECK(cfg.seed == 0);
    CHECK(cfg.n_perm == 999);
    CHECK(cfg.alpha_map == 0.05);
    CHECK(cfg.alpha_report == 0.001);
    CHECK(cfg.workers == 0);
    CHECK(cfg.truncation == kDefaultTruncationSigmas);
    CHECK(cfg.population_floor == kDefaultPopulationFloor);
    CHECK(cfg.permissive == false);
    CHECK(cfg.weights.kind == WeightScheme::Kind::queen);
    CHECK(cfg.out_dir == fs::path("out"));
    CHECK(cfg.structures == dir / "structures.geojson");
    CHECK(cfg.ontology == dir / "ontology.ini");
}

TEST_CASE("run config reads every field") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    REQUIRE(cfg.origin.has_value());
    CHECK(cfg.origin->lon == 106.8);
    CHECK(cfg.origin->lat == -6.2);
    CHECK(cfg.seed == 7);
    CHECK(cfg.n_perm == 99);
    CHECK(cfg.alpha_map == 0.05);
    CHECK(cfg.alpha_report == 0.05);
    CHECK(cfg.workers == 2);
    REQUIRE(cfg.group.has_value());
    CHECK(*cfg.group == dir / "group.asc");
    CHECK(cfg.weights.kind == WeightScheme::Kind::queen);
    CHECK(cfg.config_path == dir / "run.ini");
}

TEST_CASE("run config keeps absolute input paths") {
    TempDir dir;
    write_city(dir.path());
    TempDir other;
    std::string abs = (dir / "structures.geojson").string();
    write_file(other / "abs.ini",
               "[inputs]\n"
               "structures = " + abs + "\n"
               "neighborhoods = " + (dir / "neighborhoods.geojson").string() + "\n"
               "population = " + (dir / "population.asc").string() + "\n"
               "ontology = " + (dir / "ontology.ini").string() + "\n");
    RunConfig cfg = load_run_config(other / "abs.ini");
    CHECK(cfg.structures == fs::path(abs));
}

TEST_CASE("run config validation errors") {
    TempDir dir;
    write_city(dir.path());
    std::string cfgpath = (dir / "bad.ini").string();
    auto with_run = [&](const std::string& run_lines) {
        write_file(dir / "bad.ini",
                   "[inputs]\n"
                   "structures = structures.geojson\n"
                   "neighborhoods = neighborhoods.geojson\n"
                   "population = population.asc\n"
                   "ontology = ontology.ini\n"
                   "\n[run]\n" + run_lines);
    };
    auto with_weights = [&](const std::string& weight_lines) {
        write_file(dir / "bad.ini",
                   "[inputs]\n"
                   "structures = structures.geojson\n"
                   "neighborhoods = neighborhoods.geojson\n"
                   "population = population.asc\n"
                   "ontology = ontology.ini\n"
                   "\n[weights]\n" + weight_lines);
    };

    SUBCASE("missing inputs section") {
        write_file(dir / "bad.ini", "[run]\nseed = 1\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": missing required section [inputs]").c_str(), ConfigError);
    }
    SUBCASE("input file not found") {
        write_file(dir / "bad.ini",
                   "[inputs]\n"
                   "structures = nope.geojson\n"
                   "neighborhoods = neighborhoods.geojson\n"
                   "population = population.asc\n"
                   "ontology = ontology.ini\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": input file not found: " + (dir / "nope.geojson").string())
                .c_str(),
            ConfigError);
    }
    SUBCASE("origin needs both coordinates") {
        with_run("origin_lon = 106.8\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": origin_lon and origin_lat must appear together").c_str(),
            ConfigError);
    }
    SUBCASE("origin out of range") {
        with_run("origin_lon = 200\norigin_lat = -6.2\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": origin out of range").c_str(),
                             ConfigError);
    }
    SUBCASE("n_perm floor") {
        with_run("n_perm = 98\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": n_perm must be at least 99").c_str(),
                             ConfigError);
    }
    SUBCASE("alpha_map range") {
        with_run("alpha_map = 0\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": alpha_map must lie in (0, 1)").c_str(),
                             ConfigError);
    }
    SUBCASE("alpha_report range") {
        with_run("alpha_report = 1\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": alpha_report must lie in (0, 1)").c_str(), ConfigError);
    }
    SUBCASE("workers sign") {
        with_run("workers = -1\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": workers must be >= 0").c_str(),
                             ConfigError);
    }
    SUBCASE("truncation positive") {
        with_run("truncation = 0\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": truncation must be positive").c_str(),
                             ConfigError);
    }
    SUBCASE("population floor positive") {
        with_run("population_floor = 0\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": population_floor must be positive").c_str(), ConfigError);
    }
    SUBCASE("seed must be unsigned") {
        with_run("seed = abc\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            "section [run] key 'seed': expected an unsigned integer, got 'abc'",
            ConfigError);
    }
    SUBCASE("weights kind") {
        with_weights("kind = rook\n");
        CHECK_THROWS_WITH_AS(
            load_run_config(dir / "bad.ini"),
            (cfgpath + ": weights kind must be queen or knn").c_str(), ConfigError);
    }
    SUBCASE("knn k floor") {
        with_weights("kind = knn\nk = 0\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": k must be >= 1").c_str(), ConfigError);
    }
    SUBCASE("snap eps positive") {
        with_weights("snap_eps = 0\n");
        CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.ini"),
                             (cfgpath + ": snap_eps must be positive").c_str(),
                             ConfigError);
    }
}

TEST_CASE("stages compose to the same bytes as run") {
    TempDir dir;
    write_city(dir.path());
    RunConfig base = load_run_config(dir / "run.ini");

    std::ostringstream log_a;
    RunConfig cfg_a = base;
    cfg_a.out_dir = dir / "A";
    stage_validate(cfg_a, log_a);
    CHECK(!fs::exists(cfg_a.out_dir));
    stage_layers(cfg_a, log_a);
    stage_fuse(cfg_a, log_a);
    stage_lisa(cfg_a, log_a);
    stage_report(cfg_a, log_a);

    std::ostringstream log_b;
    RunConfig cfg_b = base;
    cfg_b.out_dir = dir / "B";
    run(cfg_b, log_b);

    CHECK(log_a.str().find("validate: ok") != std::string::npos);
    CHECK(log_a.str().find("layers: rendered 2 layers from 11 structures") !=
          std::string::npos);
    CHECK(log_b.str().find("fuse: 2 layers -> total, bridging, bonding surfaces") !=
          std::string::npos);
    CHECK(log_b.str().find("run: complete, manifest written") != std::string::npos);

    auto a = dir_contents(cfg_a.out_dir);
    auto b = dir_contents(cfg_b.out_dir);
    for (const std::string& name : kExpectedOutputs) {
        CAPTURE(name);
        REQUIRE(a.count(name) == 1);
        REQUIRE(b.count(name) == 1);
        CHECK(a[name] == b[name]);
    }
    CHECK(a.size() == kExpectedOutputs.size());
    CHECK(b.size() == kExpectedOutputs.size() + 1);
    CHECK(b.count("manifest.json") == 1);

    SUBCASE("worker count leaves the outputs untouched") {
        std::ostringstream log_c;
        RunConfig cfg_c = base;
        cfg_c.out_dir = dir / "C";
        cfg_c.workers = 1;
        run(cfg_c, log_c);
        auto c = dir_contents(cfg_c.out_dir);
        for (const std::string& name : kExpectedOutputs) {
            CAPTURE(name);
            REQUIRE(c.count(name) == 1);
            CHECK(c[name] == b[name]);
        }
    }
}

TEST_CASE("failed stage leaves no partial outputs") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "partial";
    cfg.truncation = -1.0;
    std::ostringstream log;
    CHECK_THROWS_WITH_AS(stage_layers(cfg, log),
                         "kernel truncation must be positive", ComputeError);
    CHECK(fs::exists(cfg.out_dir));
    CHECK(!fs::exists(cfg.out_dir / "catchments.csv"));
    CHECK(dir_contents(cfg.out_dir).empty());
}

TEST_CASE("fuse stage needs rendered layers") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "fresh";
    fs::create_directories(cfg.out_dir);
    std::ostringstream log;
    CHECK_THROWS_AS(stage_fuse(cfg, log), IngestError);

    SUBCASE("mismatched part grids are rejected") {
        stage_layers(cfg, log);
        write_file(cfg.out_dir / "layer_worship_bonding.asc",
                   ascii_grid_text(3, 3, 0.0, 0.0, 100.0, "0"));
        CHECK_THROWS_WITH_AS(stage_fuse(cfg, log),
                             "layer 'worship' grids do not align across parts",
                             IngestError);
    }
}

TEST_CASE("run prefixes stage errors with the stage name") {
    TempDir dir;
    write_city(dir.path());
    write_file(dir / "group.asc", ascii_grid_text(10, 34, 0.0, 0.0, 100.0, "0.25"));
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "bad";
    std::ostringstream log;
    try {
        run(cfg, log);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        std::string msg = e.what();
        CHECK(msg.rfind("validate: ", 0) == 0);
        CHECK(msg.find("grid does not align with population raster") !=
              std::string::npos);
    }
}

TEST_CASE("report stage needs the lisa table") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "empty";
    fs::create_directories(cfg.out_dir);
    std::ostringstream log;
    CHECK_THROWS_WITH_AS(
        stage_report(cfg, log),
        ("cannot open " + (cfg.out_dir / "lisa.csv").string() + " (run lisa first)")
            .c_str(),
        IngestError);
}

TEST_CASE("lisa stage reports neighborhoods outside the raster") {
    TempDir dir;
    write_city(dir.path(), /*extra_offshore_hood=*/true);
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "out";
    std::ostringstream log;
    stage_layers(cfg, log);
    stage_fuse(cfg, log);
    stage_lisa(cfg, log);
    CHECK(log.str().find("warning: neighborhood 10 (offshore ward) covers no "
                         "raster cells; excluded from clustering") !=
          std::string::npos);
    std::vector<std::string> lines =
        split_lines(read_file(cfg.out_dir / "lisa.csv"));
    REQUIRE(lines.size() == 10);
    for (std::size_t i = 1; i < lines.size(); ++i)
        CHECK(lines[i].rfind("10,", 0) != 0);
}

TEST_CASE("manifest describes the run") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "out";
    std::ostringstream log;
    run(cfg, log);

    nlohmann::ordered_json m =
        nlohmann::ordered_json::parse(read_file(cfg.out_dir / "manifest.json"));
    CHECK(m["tool"] == "resil-fuse");
    CHECK(m["version"] == "0.1.0");
    CHECK(std::regex_match(
        m["created_utc"].get<std::string>(),
        std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));

    CHECK(m["config"]["seed"] == 7);
    CHECK(m["config"]["n_perm"] == 99);
    CHECK(m["config"]["alpha_map"] == 0.05);
    CHECK(m["config"]["alpha_report"] == 0.05);
    CHECK(m["config"]["workers"] == 2);
    CHECK(m["config"]["permissive"] == false);
    CHECK(m["config"]["origin"]["lon"] == 106.8);
    CHECK(m["config"]["origin"]["lat"] == -6.2);
    CHECK(m["config"]["weights"]["kind"] == "queen");
    CHECK(m["config"]["weights"].contains("snap_eps"));
    CHECK(m["config"]["out"] == cfg.out_dir.string());

    CHECK(m["structures"] == 11);
    CHECK(m["neighborhoods"] == 9);
    CHECK(m["neighborhood_parts"] == 9);
    CHECK(m["zero_population_structures"] ==
          nlohmann::ordered_json::array({"m_off"}));

    REQUIRE(m["inputs"].is_array());
    std::vector<std::string> input_names;
    for (const auto& entry : m["inputs"]) {
        input_names.push_back(entry["name"].get<std::string>());
        std::string sha = entry["sha256"].get<std::string>();
        CHECK(sha.size() == 64);
        CHECK(sha.find_first_not_of("0123456789abcdef") == std::string::npos);
        CHECK(entry["bytes"].get<std::uint64_t>() > 0);
    }
    CHECK(input_names ==
          std::vector<std::string>{"run.ini", "ontology.ini", "structures.geojson",
                                   "neighborhoods.geojson", "population.asc",
                                   "group.asc"});
    CHECK(m["inputs"][1]["sha256"] == sha256_hex_file(dir / "ontology.ini"));
    CHECK(m["inputs"][1]["bytes"] == fs::file_size(dir / "ontology.ini"));

    REQUIRE(m["outputs"].is_array());
    REQUIRE(m["outputs"].size() == kExpectedOutputs.size());
    for (std::size_t i = 0; i < kExpectedOutputs.size(); ++i) {
        CAPTURE(kExpectedOutputs[i]);
        CHECK(m["outputs"][i]["name"] == kExpectedOutputs[i]);
    }
    CHECK(m["outputs"][20]["name"] == "lisa.csv");
    CHECK(m["outputs"][20]["sha256"] == sha256_hex_file(cfg.out_dir / "lisa.csv"));

    std::vector<std::string> timing_keys;
    for (const auto& [key, ms] : m["timings_ms"].items()) {
        timing_keys.push_back(key);
        CHECK(ms.get<double>() >= 0.0);
    }
    CHECK(timing_keys == std::vector<std::string>{"validate", "layers", "fuse",
                                                  "lisa", "report"});
}

TEST_CASE("report file layout") {
    TempDir dir;
    write_city(dir.path());
    RunConfig cfg = load_run_config(dir / "run.ini");
    cfg.out_dir = dir / "out";
    std::ostringstream log;
    run(cfg, log);

    std::vector<std::string> lines = split_lines(read_file(cfg.out_dir / "report.md"));
    REQUIRE(lines.size() >= 8);
    CHECK(lines[0] == "# Neighborhood social capital clusters");
    CHECK(lines[1] == "");
    CHECK(lines[2] ==
          "Statistically significant high and low relative social capital "
          "neighborhoods with p-value <= 0.05 (99 conditional permutations, "
          "seed 7).");
    CHECK(lines[3] == "");
    CHECK(lines[4] ==
          "| Stable (High-High) Neighborhood | Feral (Low-Low) Neighborhood |");
    CHECK(lines[5] == "| --- | --- |");

    std::size_t i = 6;
    int hh_cells = 0, ll_cells = 0;
    std::regex cell(R"([0-9]+: ward [0-9]+ \((HH|LL), p = 0\.[0-9]+\))");
    for (; i < lines.size() && !lines[i].empty(); ++i) {
        const std::string& row = lines[i];
        REQUIRE(row.size() >= 5);
        REQUIRE(row.rfind("| ", 0) == 0);
        REQUIRE(row.substr(row.size() - 2) == " |");
        std::size_t sep = row.find(" | ");
        REQUIRE(sep != std::string::npos);
        std::string left = row.substr(2, sep - 2);
        std::string right = row.substr(sep + 3, row.size() - sep - 5);
        if (!left.empty()) {
            CHECK(std::regex_match(left, cell));
            CHECK(left.find("(HH,") != std::string::npos);
            ++hh_cells;
        }
        if (!right.empty()) {
            CHECK(std::regex_match(right, cell));
            CHECK(right.find("(LL,") != std::string::npos);
            ++ll_cells;
        }
    }
    REQUIRE(i < lines.size());
    CHECK(lines[i] == "");
    REQUIRE(i + 1 < lines.size());
    std::smatch m;
    REQUIRE(std::regex_match(
        lines[i + 1], m,
        std::regex(R"(([0-9]+) High-High and ([0-9]+) Low-Low of 9 neighborhoods analyzed\.)")));
    CHECK(std::stoi(m[1]) == hh_cells);
    CHECK(std::stoi(m[2]) == ll_cells);
}

TEST_CASE("cli version and argument errors") {
    std::string out;
    CHECK(run_cli("--version", &out) == 0);
    CHECK(out == "resil-fuse 0.1.0\n");
    CHECK(run_cli("", &out) == 2);
    CHECK(run_cli("frobnicate", &out) == 2);
    CHECK(run_cli("run", &out) == 2);
}

TEST_CASE("cli exit codes map onto error classes") {
    TempDir dir;
    write_city(dir.path());
    std::string cfg = (dir / "run.ini").string();
    std::string out;

    CHECK(run_cli("run --config " + (dir / "missing.ini").string(), &out) == 2);
    CHECK(out.find("cannot open config") != std::string::npos);

    CHECK(run_cli("report --config " + cfg + " --out " +
                      (dir / "fresh").string(),
                  &out) == 3);
    CHECK(out.find("(run lisa first)") != std::string::npos);

    write_file(dir / "structures.geojson", "{ not json\n");
    CHECK(run_cli("run --config " + cfg + " --out " + (dir / "o1").string(),
                  &out) == 3);
    CHECK(out.find("error: run: validate: ") != std::string::npos);
}

TEST_CASE("cli reports compute failures") {
    TempDir dir;
    write_city(dir.path(), /*extra_offshore_hood=*/false, /*raster_xll=*/50000.0);
    std::string out;
    CHECK(run_cli("run --config " + (dir / "run.ini").string() + " --out " +
                      (dir / "o").string(),
                  &out) == 4);
    CHECK(out.find("error: run: lisa: fewer than 3 neighborhoods cover any "
                   "raster cells") != std::string::npos);
}

TEST_CASE("cli overrides for out, seed, and workers") {
    TempDir dir;
    write_city(dir.path());
    std::string cfg = (dir / "run.ini").string();
    std::string out;

    CHECK(run_cli("layers --config " + cfg + " --out " + (dir / "ovr").string(),
                  &out) == 0);
    CHECK(fs::exists(dir / "ovr" / "catchments.csv"));

    fs::path full = dir / "full";
    CHECK(run_cli("run --config " + cfg + " --out " + full.string() +
                      " --seed 11 --workers 1",
                  &out) == 0);
    CHECK(out.find("run: complete, manifest written") != std::string::npos);
    nlohmann::json m = nlohmann::json::parse(read_file(full / "manifest.json"));
    CHECK(m["config"]["seed"] == 11);
    CHECK(m["config"]["workers"] == 1);
    std::string report = read_file(full / "report.md");
    CHECK(report.find("seed 11)") != std::string::npos);
}
