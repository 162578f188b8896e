#include "resil/density.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "resil/errors.hpp"

namespace resil {

double amplitude(double weight_eff, double capacity, double catchment_population,
                 double population_floor) {
    if (!(population_floor > 0.0))
        throw ComputeError("population floor must be positive");
    return weight_eff * capacity / std::max(catchment_population, population_floor);
}

double amplitude(const Ontology& ont, const SocialStructure& s,
                 const CatchmentResult& c, double population_floor) {
    double w = effective_weight(ont, s, c.ingroup_fraction);
    return amplitude(w, s.capacity, c.population, population_floor);
}

Raster render_layer(const GridHeader& header, const std::vector<KernelSource>& sources,
                    double truncation_sigmas, int workers) {
    if (!(truncation_sigmas > 0.0))
        throw ComputeError("kernel truncation must be positive");
    for (const KernelSource& s : sources)
        if (!(s.bandwidth > 0.0))
            throw ComputeError("kernel bandwidth must be positive");

    Raster out = Raster::filled(header, 0.0);
    if (sources.empty() || header.nrows == 0 || header.ncols == 0) return out;

    // Bucket sources by the rows their truncation disc touches, keeping
    // input order inside each bucket.
    std::vector<std::vector<int>> row_sources(header.nrows);
    const double top = header.yllcorner + header.nrows * header.cellsize;
    for (int si = 0; si < static_cast<int>(sources.size()); ++si) {
        const KernelSource& s = sources[si];
        const double reach = truncation_sigmas * s.bandwidth;
        int row_lo =
            static_cast<int>(std::floor((top - (s.y + reach)) / header.cellsize - 0.5));
        int row_hi =
            static_cast<int>(std::ceil((top - (s.y - reach)) / header.cellsize - 0.5));
        row_lo = std::max(row_lo, 0);
        row_hi = std::min(row_hi, header.nrows - 1);
        for (int row = row_lo; row <= row_hi; ++row) row_sources[row].push_back(si);
    }

    auto render_row = [&](int row) {
        const double cy = header.yllcorner + (header.nrows - row - 0.5) * header.cellsize;
        double* cells = out.values.data() + static_cast<std::size_t>(row) * header.ncols;
        for (int si : row_sources[row]) {
            const KernelSource& s = sources[si];
            const double reach = truncation_sigmas * s.bandwidth;
            const double reach2 = reach * reach;
            const double dy = cy - s.y;
            if (dy * dy > reach2) continue;
            const double inv2s2 = 1.0 / (2.0 * s.bandwidth * s.bandwidth);
            int col_lo = static_cast<int>(
                std::floor((s.x - reach - header.xllcorner) / header.cellsize - 0.5));
            int col_hi = static_cast<int>(
                std::ceil((s.x + reach - header.xllcorner) / header.cellsize - 0.5));
            col_lo = std::max(col_lo, 0);
            col_hi = std::min(col_hi, header.ncols - 1);
            for (int col = col_lo; col <= col_hi; ++col) {
                const double cx = header.xllcorner + (col + 0.5) * header.cellsize;
                const double dx = cx - s.x;
                const double d2 = dx * dx + dy * dy;
                if (d2 > reach2) continue;
                cells[col] += s.amplitude * std::exp(-d2 * inv2s2);
            }
        }
    };

    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::clamp(n_workers, 1, header.nrows);
    if (n_workers == 1) {
        for (int row = 0; row < header.nrows; ++row) render_row(row);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (int row = next.fetch_add(1); row < header.nrows;
                 row = next.fetch_add(1))
                render_row(row);
        });
    }
    for (std::thread& t : pool) t.join();
    return out;
}

LayerSet build_layers(const std::vector<SocialStructure>& structures,
                      const Ontology& ontology,
                      const std::vector<CatchmentResult>& catchments,
                      const GridHeader& header, double truncation_sigmas, int workers,
                      double population_floor) {
    if (structures.size() != catchments.size())
        throw ComputeError("catchment result count does not match structures");

    LayerSet set;
    set.header = header;
    for (const std::string& layer_name : ontology.layer_order()) {
        std::vector<KernelSource> bridging, bonding;
        int count = 0;
        for (std::size_t i = 0; i < structures.size(); ++i) {
            const SocialStructure& s = structures[i];
            const CategorySpec& cat = ontology.require(s.category);
            if (cat.layer != layer_name) continue;
            double a = amplitude(ontology, s, catchments[i], population_floor);
            KernelSource src{s.position.x, s.position.y, a, cat.bandwidth};
            if (classify_capital(ontology, s, catchments[i].ingroup_fraction) ==
                Capital::bridging)
                bridging.push_back(src);
            else
                bonding.push_back(src);
            ++count;
        }
        DensityLayer layer;
        layer.layer_name = layer_name;
        layer.source_count = count;
        layer.bridging_part = render_layer(header, bridging, truncation_sigmas, workers);
        layer.bonding_part = render_layer(header, bonding, truncation_sigmas, workers);
        layer.grid = layer.bridging_part;
        for (std::size_t i = 0; i < layer.grid.values.size(); ++i)
            layer.grid.values[i] += layer.bonding_part.values[i];
        set.layers.push_back(std::move(layer));
    }
    return set;
}

SocialCapitalSurface fuse(const LayerSet& layers, const Ontology& ontology) {
    SocialCapitalSurface out;
    out.total = Raster::filled(layers.header, 0.0);
    out.bridging = Raster::filled(layers.header, 0.0);
    out.bonding = Raster::filled(layers.header, 0.0);
    for (const DensityLayer& layer : layers.layers) {
        if (!layer.bridging_part.header.same_grid(layers.header) ||
            !layer.bonding_part.header.same_grid(layers.header))
            throw ComputeError("layer '" + layer.layer_name +
                               "' grid does not match the surface grid");
        const double lambda = ontology.layer_weight(layer.layer_name);
        for (std::size_t i = 0; i < out.total.values.size(); ++i) {
            out.bridging.values[i] += lambda * layer.bridging_part.values[i];
            out.bonding.values[i] += lambda * layer.bonding_part.values[i];
        }
    }
    for (std::size_t i = 0; i < out.total.values.size(); ++i)
        out.total.values[i] = out.bridging.values[i] + out.bonding.values[i];
    return out;
}

}  // namespace resil
