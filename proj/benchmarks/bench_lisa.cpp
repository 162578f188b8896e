#include <benchmark/benchmark.h>

#include <vector>

#include "resil/rng.hpp"
#include "resil/spatial_stats.hpp"

namespace {

// k-nearest ring lattice, row-standardized: enough structure to exercise
// the permutation loop without any geometry work.
resil::SpatialWeights ring_lattice(int n, int k) {
    resil::SpatialWeights w;
    w.n = n;
    w.neighbors.resize(n);
    w.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int d = 1; d <= k / 2; ++d) {
            w.neighbors[i].push_back((i + d) % n);
            w.neighbors[i].push_back((i - d + n) % n);
        }
        w.weights[i].assign(w.neighbors[i].size(),
                            1.0 / static_cast<double>(w.neighbors[i].size()));
    }
    return w;
}

void BM_PermutationP(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int n_perm = static_cast<int>(state.range(1));
    const int workers = static_cast<int>(state.range(2));
    const auto w = ring_lattice(n, 6);
    std::vector<double> values(n);
    auto gen = resil::rng::make_stream(31, 0);
    for (double& v : values) v = resil::rng::uniform01(gen);
    const auto stats = resil::local_morans_i(values, w);
    for (auto _ : state) {
        auto p = resil::permutation_p(values, w, stats, n_perm, 42, workers);
        benchmark::DoNotOptimize(p.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n_perm);
}

}  // namespace

BENCHMARK(BM_PermutationP)
    ->Args({25, 999, 1})
    ->Args({25, 999, 4})
    ->Args({100, 999, 4})
    ->Args({400, 999, 4})
    ->Unit(benchmark::kMillisecond);
