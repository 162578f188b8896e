#pragma once

#include <string>
#include <vector>

#include "resil/catchment.hpp"
#include "resil/ontology.hpp"
#include "resil/raster.hpp"
#include "resil/structures.hpp"

namespace resil {

inline constexpr double kDefaultPopulationFloor = 1.0;
inline constexpr double kDefaultTruncationSigmas = 4.0;

// One Gaussian bump: peak `amplitude` at (x, y), scale `bandwidth` meters.
struct KernelSource {
    double x = 0.0;
    double y = 0.0;
    double amplitude = 0.0;
    double bandwidth = 0.0;
};

// Kernel peak height per the amplitude equation, with the population floor
// guarding empty catchments.
double amplitude(double weight_eff, double capacity, double catchment_population,
                 double population_floor = kDefaultPopulationFloor);
double amplitude(const Ontology& ont, const SocialStructure& s,
                 const CatchmentResult& c,
                 double population_floor = kDefaultPopulationFloor);

// Sum of truncated Gaussian kernels sampled at cell centers. A kernel
// reaches cells within truncation_sigmas * bandwidth of its center; each
// cell accumulates sources in input order whatever the worker count, so
// renders are bit-identical across thread counts. workers <= 0 means all
// hardware threads.
Raster render_layer(const GridHeader& header, const std::vector<KernelSource>& sources,
                    double truncation_sigmas = kDefaultTruncationSigmas,
                    int workers = 0);

struct DensityLayer {
    std::string layer_name;
    Raster grid;  // cellwise sum of the two parts below
    int source_count = 0;
    // The bridging/bonding split of the same kernels, kept so fusion can
    // partition per-structure contributions.
    Raster bridging_part;
    Raster bonding_part;
};

struct LayerSet {
    GridHeader header;
    std::vector<DensityLayer> layers;  // ontology layer order
};

// One layer per distinct ontology layer name: every structure renders a
// kernel with its category's bandwidth and its amplitude, routed into the
// bridging or bonding part by classify_capital of its catchment fraction.
LayerSet build_layers(const std::vector<SocialStructure>& structures,
                      const Ontology& ontology,
                      const std::vector<CatchmentResult>& catchments,
                      const GridHeader& header,
                      double truncation_sigmas = kDefaultTruncationSigmas,
                      int workers = 0,
                      double population_floor = kDefaultPopulationFloor);

struct SocialCapitalSurface {
    Raster total;     // bridging + bonding, cell by cell
    Raster bridging;
    Raster bonding;
};

// Weighted cellwise sum over layers using the ontology's layer_weights
// (missing entries weigh 1).
SocialCapitalSurface fuse(const LayerSet& layers, const Ontology& ontology);

}  // namespace resil
