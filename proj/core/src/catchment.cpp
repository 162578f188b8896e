#include "resil/catchment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "resil/errors.hpp"

namespace resil {

CatchmentResult catchment_population(const Raster& population, const Raster* group,
                                     geo::PlanarPoint center, double radius) {
    if (!(radius > 0.0)) throw ComputeError("catchment radius must be positive");
    if (group && !group->header.same_grid(population.header))
        throw ComputeError("group raster does not align with population raster");

    const GridHeader& h = population.header;
    const double r2 = radius * radius;

    // Clamp the scan to the bounding square of the circle.
    int col_lo = static_cast<int>(std::floor((center.x - radius - h.xllcorner) /
                                             h.cellsize));
    int col_hi = static_cast<int>(std::floor((center.x + radius - h.xllcorner) /
                                             h.cellsize));
    double top = h.yllcorner + h.nrows * h.cellsize;
    int row_lo = static_cast<int>(std::floor((top - (center.y + radius)) / h.cellsize));
    int row_hi = static_cast<int>(std::floor((top - (center.y - radius)) / h.cellsize));
    col_lo = std::max(col_lo, 0);
    row_lo = std::max(row_lo, 0);
    col_hi = std::min(col_hi, h.ncols - 1);
    row_hi = std::min(row_hi, h.nrows - 1);

    CatchmentResult out;
    double weighted = 0.0;
    for (int row = row_lo; row <= row_hi; ++row) {
        for (int col = col_lo; col <= col_hi; ++col) {
            double v = population.at(row, col);
            if (population.is_nodata(v)) continue;
            geo::PlanarPoint c = population.cell_center(row, col);
            double dx = c.x - center.x;
            double dy = c.y - center.y;
            if (dx * dx + dy * dy > r2) continue;
            ++out.cell_count;
            out.population += v;
            if (group) {
                double f = group->at(row, col);
                if (!group->is_nodata(f)) weighted += v * f;
            }
        }
    }
    if (out.population > 0.0) {
        out.ingroup_fraction = group ? weighted / out.population : 1.0;
    } else {
        out.zero_population = true;
        out.ingroup_fraction = 0.0;
    }
    return out;
}

void write_catchment_csv(const std::vector<CatchmentResult>& results,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ComputeError("cannot write " + path.string());
    out << "structure_id,population,ingroup_fraction,cell_count,flags\n";
    for (const CatchmentResult& r : results) {
        out << r.structure_id << ',' << format_double(r.population) << ','
            << format_double(r.ingroup_fraction) << ',' << r.cell_count << ','
            << (r.zero_population ? "zero_population" : "") << "\n";
    }
    if (!out) throw ComputeError("write failed for " + path.string());
}

}  // namespace resil
