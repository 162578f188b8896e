#include "resil/raster.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "resil/errors.hpp"

namespace resil {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "0";
    return std::string(buf, ptr);
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const std::string& tok, const std::filesystem::path& path,
                    const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw IngestError(path.string() + ": bad " + what + " '" + tok + "'");
    return v;
}

}  // namespace

Raster read_ascii_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open raster " + path.string());

    GridHeader h;
    bool saw_ncols = false, saw_nrows = false, saw_xll = false, saw_yll = false,
         saw_cell = false;
    std::string key;
    // Header: key/value lines until the first purely numeric token.
    while (in >> key) {
        std::string k = lower(key);
        if (k == "ncols" || k == "nrows" || k == "xllcorner" || k == "yllcorner" ||
            k == "cellsize" || k == "nodata_value") {
            std::string tok;
            if (!(in >> tok)) throw IngestError(path.string() + ": truncated header");
            double v = parse_number(tok, path, k.c_str());
            if (k == "ncols") {
                h.ncols = static_cast<int>(v);
                saw_ncols = true;
            } else if (k == "nrows") {
                h.nrows = static_cast<int>(v);
                saw_nrows = true;
            } else if (k == "xllcorner") {
                h.xllcorner = v;
                saw_xll = true;
            } else if (k == "yllcorner") {
                h.yllcorner = v;
                saw_yll = true;
            } else if (k == "cellsize") {
                h.cellsize = v;
                saw_cell = true;
            } else {
                h.nodata = v;
            }
        } else {
            break;  // first data token, handled below
        }
    }
    if (!saw_ncols || !saw_nrows || !saw_xll || !saw_yll || !saw_cell)
        throw IngestError(path.string() + ": incomplete grid header");
    if (h.ncols <= 0 || h.nrows <= 0)
        throw IngestError(path.string() + ": non-positive grid dimensions");
    if (h.cellsize <= 0.0) throw IngestError(path.string() + ": non-positive cellsize");

    Raster r;
    r.header = h;
    const std::size_t n = static_cast<std::size_t>(h.ncols) * h.nrows;
    r.values.reserve(n);
    if (!in.fail() && !key.empty()) {
        if (std::isalpha(static_cast<unsigned char>(key[0])))
            throw IngestError(path.string() + ": unknown header key '" + key + "'");
        r.values.push_back(parse_number(key, path, "value"));
    }
    std::string tok;
    while (r.values.size() < n && in >> tok) {
        r.values.push_back(parse_number(tok, path, "value"));
    }
    if (r.values.size() != n)
        throw IngestError(path.string() + ": data ends in row " +
                          std::to_string(r.values.size() / h.ncols) + ": expected " +
                          std::to_string(n) + " values, got " +
                          std::to_string(r.values.size()));
    if (in >> tok)
        throw IngestError(path.string() + ": trailing data after " + std::to_string(n) +
                          " values");
    return r;
}

void write_ascii_grid(const Raster& raster, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ComputeError("cannot write raster " + path.string());
    const GridHeader& h = raster.header;
    out << "ncols " << h.ncols << "\n";
    out << "nrows " << h.nrows << "\n";
    out << "xllcorner " << format_double(h.xllcorner) << "\n";
    out << "yllcorner " << format_double(h.yllcorner) << "\n";
    out << "cellsize " << format_double(h.cellsize) << "\n";
    out << "nodata_value " << format_double(h.nodata) << "\n";
    for (int row = 0; row < h.nrows; ++row) {
        for (int col = 0; col < h.ncols; ++col) {
            if (col) out << ' ';
            out << format_double(raster.at(row, col));
        }
        out << "\n";
    }
    if (!out) throw ComputeError("write failed for raster " + path.string());
}

Raster load_population(const std::filesystem::path& path) {
    Raster r = read_ascii_grid(path);
    for (double v : r.values) {
        if (r.is_nodata(v)) continue;
        if (!(v >= 0.0))
            throw IngestError(path.string() + ": negative population value " +
                              format_double(v));
    }
    return r;
}

Raster load_group_fraction(const std::filesystem::path& path, const GridHeader& align) {
    Raster r = read_ascii_grid(path);
    if (!r.header.same_grid(align))
        throw IngestError(path.string() + ": grid does not align with population raster");
    for (double v : r.values) {
        if (r.is_nodata(v)) continue;
        if (!(v >= 0.0 && v <= 1.0))
            throw IngestError(path.string() + ": fraction out of [0,1]: " +
                              format_double(v));
    }
    return r;
}

void write_pgm(const Raster& raster, const std::filesystem::path& path, PgmScale scale) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (double v : raster.values) {
        if (raster.is_nodata(v)) continue;
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    double span_lo = lo, span_hi = hi;
    if (scale == PgmScale::diverging) {
        double m = std::max(std::abs(lo), std::abs(hi));
        span_lo = -m;
        span_hi = m;
    }
    const double span = span_hi - span_lo;

    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw ComputeError("cannot write heatmap " + path.string());
    out << "P5\n" << raster.header.ncols << " " << raster.header.nrows << "\n255\n";
    for (double v : raster.values) {
        std::uint8_t px = 0;
        if (any && !raster.is_nodata(v)) {
            if (span > 0.0) {
                double t = (v - span_lo) / span;
                t = std::clamp(t, 0.0, 1.0);
                px = static_cast<std::uint8_t>(std::lround(t * 255.0));
            } else {
                px = scale == PgmScale::diverging ? 128 : 255;
            }
        }
        out.write(reinterpret_cast<const char*>(&px), 1);
    }
    if (!out) throw ComputeError("write failed for heatmap " + path.string());

    std::ofstream side(path.string() + ".txt", std::ios::trunc);
    if (!side) throw ComputeError("cannot write sidecar for " + path.string());
    side << "scale " << (scale == PgmScale::diverging ? "diverging" : "minmax") << "\n";
    side << "value_min " << format_double(any ? lo : raster.header.nodata) << "\n";
    side << "value_max " << format_double(any ? hi : raster.header.nodata) << "\n";
    side << "pixel_min " << format_double(span_lo) << "\n";
    side << "pixel_max " << format_double(span_hi) << "\n";
}

}  // namespace resil
