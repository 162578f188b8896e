#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "resil/geo.hpp"

namespace resil {

struct GridHeader {
    int ncols = 0;
    int nrows = 0;
    double xllcorner = 0.0;  // meters, planar frame
    double yllcorner = 0.0;
    double cellsize = 100.0;
    double nodata = -9999.0;

    bool same_grid(const GridHeader& o) const {
        return ncols == o.ncols && nrows == o.nrows && xllcorner == o.xllcorner &&
               yllcorner == o.yllcorner && cellsize == o.cellsize;
    }
};

// Row-major grid of doubles; row 0 is the northernmost row.
struct Raster {
    GridHeader header;
    std::vector<double> values;

    static Raster filled(const GridHeader& h, double v) {
        Raster r;
        r.header = h;
        r.values.assign(static_cast<std::size_t>(h.ncols) * h.nrows, v);
        return r;
    }

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * header.ncols + col];
    }
    double& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * header.ncols + col];
    }
    bool is_nodata(double v) const { return v == header.nodata; }

    geo::PlanarPoint cell_center(int row, int col) const {
        return {header.xllcorner + (col + 0.5) * header.cellsize,
                header.yllcorner + (header.nrows - row - 0.5) * header.cellsize};
    }
};

// Shortest decimal text that round-trips the exact double (via std::to_chars).
// Used everywhere a float reaches a file so outputs are byte-reproducible.
std::string format_double(double v);

Raster read_ascii_grid(const std::filesystem::path& path);
void write_ascii_grid(const Raster& raster, const std::filesystem::path& path);

// Population loader: read_ascii_grid plus the constraint values >= 0 or nodata.
Raster load_population(const std::filesystem::path& path);

// Group-fraction loader: grid must align with `align` exactly, fractions in [0,1].
Raster load_group_fraction(const std::filesystem::path& path, const GridHeader& align);

enum class PgmScale { minmax, diverging };

// 8-bit binary PGM heatmap plus a "<path>.txt" sidecar recording the scaling.
// diverging maps [-M, +M] with M = max|value| onto [0, 255], centered at zero.
// nodata cells render as pixel 0.
void write_pgm(const Raster& raster, const std::filesystem::path& path, PgmScale scale);

}  // namespace resil
