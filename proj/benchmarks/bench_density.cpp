#include <benchmark/benchmark.h>

#include <vector>

#include "resil/density.hpp"
#include "resil/rng.hpp"

namespace {

resil::GridHeader make_header(int n) {
    resil::GridHeader h;
    h.ncols = n;
    h.nrows = n;
    h.xllcorner = 0.0;
    h.yllcorner = 0.0;
    h.cellsize = 100.0;
    h.nodata = -9999.0;
    return h;
}

std::vector<resil::KernelSource> make_sources(int count, double extent) {
    auto gen = resil::rng::make_stream(17, 0);
    std::vector<resil::KernelSource> sources;
    sources.reserve(count);
    for (int i = 0; i < count; ++i) {
        resil::KernelSource s;
        s.x = resil::rng::uniform01(gen) * extent;
        s.y = resil::rng::uniform01(gen) * extent;
        s.amplitude = resil::rng::uniform01(gen) * 2.0 - 1.0;
        s.bandwidth = 300.0 + resil::rng::uniform01(gen) * 700.0;
        sources.push_back(s);
    }
    return sources;
}

void BM_RenderLayer(benchmark::State& state) {
    const int grid = static_cast<int>(state.range(0));
    const int count = static_cast<int>(state.range(1));
    const int workers = static_cast<int>(state.range(2));
    const auto header = make_header(grid);
    const auto sources = make_sources(count, grid * header.cellsize);
    for (auto _ : state) {
        auto r = resil::render_layer(header, sources, 4.0, workers);
        benchmark::DoNotOptimize(r.values.data());
    }
    state.SetItemsProcessed(state.iterations() * count);
}

}  // namespace

BENCHMARK(BM_RenderLayer)
    ->Args({100, 50, 1})
    ->Args({100, 50, 4})
    ->Args({200, 200, 1})
    ->Args({200, 200, 4})
    ->Args({400, 500, 4})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
