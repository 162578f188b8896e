#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "resil/raster.hpp"
#include "resil/structures.hpp"

namespace resil {

struct CatchmentResult {
    std::string structure_id;
    double population = 0.0;        // people reachable from the structure
    double ingroup_fraction = 0.0;  // 1.0 when no group raster is supplied
    int cell_count = 0;             // populated cells inside the radius
    bool zero_population = false;
};

// Sums population over every non-nodata cell whose center lies within
// `radius` meters of `center`. With a group raster the ingroup fraction is
// the population-weighted mean fraction over those cells; without one it
// is 1. An empty catchment reports population 0, fraction 0, and the flag.
CatchmentResult catchment_population(const Raster& population, const Raster* group,
                                     geo::PlanarPoint center, double radius);

// Diagnostic CSV: structure_id, population, ingroup_fraction, cell_count,
// flags.
void write_catchment_csv(const std::vector<CatchmentResult>& results,
                         const std::filesystem::path& path);

}  // namespace resil
