#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "resil/density.hpp"
#include "resil/geo.hpp"
#include "resil/spatial_stats.hpp"

namespace resil {

struct RunConfig {
    std::filesystem::path config_path;

    std::filesystem::path structures;
    std::filesystem::path neighborhoods;
    std::filesystem::path population;
    std::optional<std::filesystem::path> group;
    std::filesystem::path ontology;

    std::optional<geo::GeoPoint> origin;  // default: mean structure location
    std::uint64_t seed = 0;
    int n_perm = 999;
    double alpha_map = 0.05;      // quadrant cut for lisa.csv / lisa.geojson
    double alpha_report = 0.001;  // stricter cut for the report table
    int workers = 0;              // 0 = all hardware threads
    double truncation = kDefaultTruncationSigmas;
    double population_floor = kDefaultPopulationFloor;
    bool permissive = false;
    WeightScheme weights;
    std::filesystem::path out_dir = "out";
};

// Reads the [inputs]/[run]/[weights] sections. Relative input paths resolve
// against the config file's directory and must exist; the out dir resolves
// against the working directory.
RunConfig load_run_config(const std::filesystem::path& path);

// Stages are independently runnable and communicate only through files in
// out_dir, so `run` equals the stage sequence byte for byte (manifest
// aside, which only `run` writes).
void stage_validate(const RunConfig& cfg, std::ostream& log);
void stage_layers(const RunConfig& cfg, std::ostream& log);
void stage_fuse(const RunConfig& cfg, std::ostream& log);
void stage_lisa(const RunConfig& cfg, std::ostream& log);
void stage_report(const RunConfig& cfg, std::ostream& log);

// validate, layers, fuse, lisa, report, then manifest.json with the
// effective config, input and output digests, and stage timings.
void run(const RunConfig& cfg, std::ostream& log);

}  // namespace resil
