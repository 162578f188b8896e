#include "resil/geo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace resil::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Tolerance for the on-edge containment rule, in meters.
constexpr double kEdgeEps = 1e-9;

double cross(const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return std::hypot(p.x - a.x, p.y - a.y) <= kEdgeEps;
    const double perp = std::abs((p.x - a.x) * dy - (p.y - a.y) * dx) / len;
    if (perp > kEdgeEps) return false;
    const double along = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len;
    return along >= -kEdgeEps && along <= len + kEdgeEps;
}

// Collinear-aware bounding check used by segments_intersect.
bool collinear_point_on(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

void check_ring_shape(const Ring& ring, const char* what) {
    if (ring.size() < 4)
        throw std::invalid_argument(std::string(what) + " ring has fewer than 4 vertices");
    if (ring.front().x != ring.back().x || ring.front().y != ring.back().y)
        throw std::invalid_argument(std::string(what) + " ring is not closed");
}

}  // namespace

Bounds Polygon::bounds() const {
    Bounds b{exterior.empty() ? 0.0 : exterior.front().x,
             exterior.empty() ? 0.0 : exterior.front().y,
             exterior.empty() ? 0.0 : exterior.front().x,
             exterior.empty() ? 0.0 : exterior.front().y};
    for (const auto& v : exterior) {
        b.min_x = std::min(b.min_x, v.x);
        b.min_y = std::min(b.min_y, v.y);
        b.max_x = std::max(b.max_x, v.x);
        b.max_y = std::max(b.max_y, v.y);
    }
    return b;
}

bool valid_coordinates(const GeoPoint& p) {
    return std::isfinite(p.lon) && std::isfinite(p.lat) &&
           p.lon >= -180.0 && p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0;
}

PlanarPoint project(const GeoPoint& p, const GeoPoint& origin) {
    if (!valid_coordinates(p) || !valid_coordinates(origin))
        throw std::invalid_argument("project: coordinates outside [-180,180] x [-90,90]");
    const double x = kEarthRadiusM * (p.lon - origin.lon) * kDegToRad *
                     std::cos(origin.lat * kDegToRad);
    const double y = kEarthRadiusM * (p.lat - origin.lat) * kDegToRad;
    return {x, y};
}

GeoPoint unproject(const PlanarPoint& p, const GeoPoint& origin) {
    const double lon =
        origin.lon + p.x / (kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad));
    const double lat = origin.lat + p.y / (kEarthRadiusM * kDegToRad);
    return {lon, lat};
}

double distance(const PlanarPoint& a, const PlanarPoint& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

bool contains(const Polygon& poly, const PlanarPoint& p) {
    check_ring_shape(poly.exterior, "exterior");
    for (const auto& hole : poly.holes) check_ring_shape(hole, "hole");

    int crossings = 0;
    auto scan_ring = [&](const Ring& ring) -> bool {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const PlanarPoint& a = ring[i];
            const PlanarPoint& b = ring[i + 1];
            if (on_segment(p, a, b)) return true;  // boundary rule: inside
            if ((a.y > p.y) != (b.y > p.y)) {
                const double x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (p.x < x_int) ++crossings;
            }
        }
        return false;
    };

    if (scan_ring(poly.exterior)) return true;
    for (const auto& hole : poly.holes)
        if (scan_ring(hole)) return true;
    return (crossings % 2) == 1;
}

void validate(const Polygon& poly) {
    check_ring_shape(poly.exterior, "exterior");
    for (const auto& hole : poly.holes) check_ring_shape(hole, "hole");
    if (ring_area(poly.exterior) == 0.0)
        throw std::invalid_argument("polygon has zero area");
    auto check_segments = [](const Ring& ring) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            if (ring[i].x == ring[i + 1].x && ring[i].y == ring[i + 1].y)
                throw std::invalid_argument("ring has a zero-length segment");
        }
    };
    check_segments(poly.exterior);
    for (const auto& hole : poly.holes) check_segments(hole);
}

double ring_area(const Ring& ring) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        acc += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    return 0.5 * acc;
}

double area(const Polygon& poly) {
    double a = std::abs(ring_area(poly.exterior));
    for (const auto& hole : poly.holes) a -= std::abs(ring_area(hole));
    return a;
}

PlanarPoint centroid(const Polygon& poly) {
    // Area-weighted, winding-independent; holes subtract.
    double area_sum = 0.0, cx = 0.0, cy = 0.0;
    auto accumulate = [&](const Ring& ring, double sign) {
        double a = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double w = ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
            a += w;
            sx += (ring[i].x + ring[i + 1].x) * w;
            sy += (ring[i].y + ring[i + 1].y) * w;
        }
        if (a == 0.0) return;
        const double scale = sign * std::abs(a) / a;  // flips if wound backwards
        area_sum += sign * std::abs(a);
        cx += scale * sx;
        cy += scale * sy;
    };
    accumulate(poly.exterior, 1.0);
    for (const auto& hole : poly.holes) accumulate(hole, -1.0);
    if (area_sum == 0.0) throw std::invalid_argument("centroid of zero-area polygon");
    return {cx / (3.0 * area_sum), cy / (3.0 * area_sum)};
}

bool segments_intersect(const PlanarPoint& a, const PlanarPoint& b,
                        const PlanarPoint& c, const PlanarPoint& d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && collinear_point_on(a, c, d)) return true;
    if (d2 == 0 && collinear_point_on(b, c, d)) return true;
    if (d3 == 0 && collinear_point_on(c, a, b)) return true;
    if (d4 == 0 && collinear_point_on(d, a, b)) return true;
    return false;
}

bool ring_self_intersects(const Ring& ring) {
    if (ring.size() < 4) return false;
    const std::size_t nseg = ring.size() - 1;
    for (std::size_t i = 0; i < nseg; ++i) {
        for (std::size_t j = i + 2; j < nseg; ++j) {
            if (i == 0 && j == nseg - 1) continue;  // first and last share the closing vertex
            if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1])) return true;
        }
    }
    return false;
}

}  // namespace resil::geo
