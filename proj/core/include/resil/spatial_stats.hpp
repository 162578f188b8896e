#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resil/raster.hpp"
#include "resil/structures.hpp"

namespace resil {

// One observation: all polygon parts sharing a neighborhood id, grouped in
// first-appearance order.
struct HoodGroup {
    long long id = 0;
    std::string name;
    std::vector<int> parts;  // indices into the neighborhood record list
};

std::vector<HoodGroup> group_by_id(const std::vector<Neighborhood>& hoods);

struct AggregateResult {
    std::vector<double> value;  // mean surface value per group
    std::vector<int> cells;     // cell centers assigned to the group
};

// Assigns each non-nodata cell center to the first neighborhood record (in
// input order) whose polygon contains it, then averages per group. A group
// that captures no cells has value 0 here and is the caller's job to
// exclude from analysis.
AggregateResult aggregate(const Raster& surface,
                          const std::vector<Neighborhood>& hoods,
                          const std::vector<HoodGroup>& groups);

// Row-standardized spatial weights: weights[i][j] pairs with the sorted
// neighbors[i][j]; nonempty rows sum to 1.
struct SpatialWeights {
    int n = 0;
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> weights;
    bool row_standardized = true;

    double s0() const;  // sum of all weights
    bool isolate(int i) const { return neighbors[i].empty(); }
};

struct WeightScheme {
    enum class Kind { queen, knn };
    Kind kind = Kind::queen;
    int k = 6;              // knn only
    double snap_eps = 1e-6; // queen vertex snap, meters
};

// Queen contiguity between groups: adjacent when any two parts share a
// vertex (within snap_eps meters) or their boundaries touch or cross.
SpatialWeights build_queen_weights(const std::vector<Neighborhood>& hoods,
                                   const std::vector<HoodGroup>& groups,
                                   double snap_eps = 1e-6);

// k nearest groups by area-weighted centroid distance, ties to lower index.
SpatialWeights build_knn_weights(const std::vector<Neighborhood>& hoods,
                                 const std::vector<HoodGroup>& groups, int k);

SpatialWeights build_weights(const std::vector<Neighborhood>& hoods,
                             const std::vector<HoodGroup>& groups,
                             const WeightScheme& scheme);

enum class Quadrant { HH, LL, LH, HL, NS, ISOLATE };

const char* quadrant_label(Quadrant q);

struct LisaStats {
    std::vector<double> z;        // deviation from the mean
    std::vector<double> lag;      // spatial lag of z
    std::vector<double> local_i;  // isolates get 0
    double m2 = 0.0;              // sum of squared deviations / n
    double global_i = 0.0;
};

// Local Moran's I normalized by m2; `anselin` false gives the raw product
// z_i * lag_i instead. Isolates contribute lag 0 and local_i 0. Requires
// n >= 3; an all-equal input degenerates to all zeros.
LisaStats local_morans_i(const std::vector<double>& values, const SpatialWeights& w,
                         bool anselin = true);

// I = (n/S0) * sum_i z_i*lag_i / sum z^2; 0 by convention when all z = 0.
double global_morans_i(const std::vector<double>& values, const SpatialWeights& w);

// Conditional permutation p-values: observation i keeps its own value and
// draws its neighbors' values from the other n-1, n_perm times, on an RNG
// stream derived from (seed, i) so results are independent of evaluation
// order and worker count. Two-sided: p = (#{|I*| >= |I|} + 1) / (n_perm + 1).
// Isolates and degenerate all-equal inputs get p = 1.
std::vector<double> permutation_p(const std::vector<double>& values,
                                  const SpatialWeights& w, const LisaStats& stats,
                                  int n_perm, std::uint64_t seed, int workers = 0);

// NS when p > alpha or either factor is exactly zero; isolates always
// ISOLATE; otherwise the sign pattern of (z, lag).
Quadrant classify(double z, double lag, double p, double alpha, bool is_isolate);

struct LisaResult {
    std::vector<HoodGroup> groups;  // analyzed groups (zero-cell ones dropped)
    std::vector<double> value;
    std::vector<int> cells;
    LisaStats stats;
    std::vector<double> p_value;
    std::vector<Quadrant> quadrant;
    std::vector<long long> excluded;  // ids of groups that covered no cells
};

// Aggregate, drop zero-cell groups, build weights over the survivors, then
// Moran statistics, permutation p-values, and quadrant labels.
LisaResult run_lisa(const Raster& surface, const std::vector<Neighborhood>& hoods,
                    const std::vector<HoodGroup>& groups, const WeightScheme& scheme,
                    int n_perm, std::uint64_t seed, double alpha, int workers = 0);

void write_lisa_csv(const LisaResult& r, const std::filesystem::path& path);

// GeoJSON of the analyzed neighborhood polygons (unprojected through
// `origin`) with the lisa.csv columns as properties; grouped parts emit
// one MultiPolygon.
void write_lisa_geojson(const LisaResult& r, const std::vector<Neighborhood>& hoods,
                        const geo::GeoPoint& origin,
                        const std::filesystem::path& path);

}  // namespace resil
