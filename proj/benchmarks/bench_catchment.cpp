#include <benchmark/benchmark.h>

#include "resil/catchment.hpp"
#include "resil/rng.hpp"

namespace {

resil::Raster make_population(int n) {
    resil::GridHeader h;
    h.ncols = n;
    h.nrows = n;
    h.xllcorner = 0.0;
    h.yllcorner = 0.0;
    h.cellsize = 100.0;
    h.nodata = -9999.0;
    resil::Raster r = resil::Raster::filled(h, 0.0);
    auto gen = resil::rng::make_stream(23, 0);
    for (double& v : r.values) v = resil::rng::uniform01(gen) * 200.0;
    return r;
}

void BM_Catchment(benchmark::State& state) {
    const int grid = static_cast<int>(state.range(0));
    const double radius = static_cast<double>(state.range(1));
    const auto pop = make_population(grid);
    const double mid = grid * pop.header.cellsize / 2.0;
    const resil::geo::PlanarPoint center{mid, mid};
    for (auto _ : state) {
        auto c = resil::catchment_population(pop, nullptr, center, radius);
        benchmark::DoNotOptimize(c.population);
    }
}

}  // namespace

BENCHMARK(BM_Catchment)
    ->Args({200, 500})
    ->Args({200, 2000})
    ->Args({400, 500})
    ->Args({400, 2000})
    ->Args({400, 8000})
    ->Unit(benchmark::kMicrosecond);
