#pragma once

#include <vector>

namespace resil::geo {

// Mean Earth radius in meters, used by the local equirectangular projection.
inline constexpr double kEarthRadiusM = 6371008.8;

struct GeoPoint {
    double lon = 0.0;  // degrees, [-180, 180]
    double lat = 0.0;  // degrees, [-90, 90]
};

struct PlanarPoint {
    double x = 0.0;  // meters east of the projection origin
    double y = 0.0;  // meters north of the projection origin
};

struct Bounds {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

    bool contains(const PlanarPoint& p, double pad = 0.0) const {
        return p.x >= min_x - pad && p.x <= max_x + pad &&
               p.y >= min_y - pad && p.y <= max_y + pad;
    }
    bool overlaps(const Bounds& o, double pad = 0.0) const {
        return min_x <= o.max_x + pad && o.min_x <= max_x + pad &&
               min_y <= o.max_y + pad && o.min_y <= max_y + pad;
    }
};

// Rings are closed: first vertex == last vertex.
using Ring = std::vector<PlanarPoint>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;

    Bounds bounds() const;
};

bool valid_coordinates(const GeoPoint& p);

// Local equirectangular projection about `origin`:
//   x = R * (lon - lon0) * cos(lat0),  y = R * (lat - lat0), angles in radians.
PlanarPoint project(const GeoPoint& p, const GeoPoint& origin);
GeoPoint unproject(const PlanarPoint& p, const GeoPoint& origin);

double distance(const PlanarPoint& a, const PlanarPoint& b);

// Even-odd ray casting over all rings. Points on any ring edge count as
// inside; callers assigning a point to several polygons keep the first match
// in stable input order. Throws std::invalid_argument on a degenerate polygon.
bool contains(const Polygon& poly, const PlanarPoint& p);

// Full validity check: closed rings, >= 4 vertices each, nonzero exterior
// area, no zero-length segments. Throws std::invalid_argument on violation.
void validate(const Polygon& poly);

double ring_area(const Ring& ring);  // signed shoelace area
double area(const Polygon& poly);    // |exterior| minus hole areas
PlanarPoint centroid(const Polygon& poly);

bool segments_intersect(const PlanarPoint& a, const PlanarPoint& b,
                        const PlanarPoint& c, const PlanarPoint& d);

// True when two non-adjacent segments of the ring intersect.
bool ring_self_intersects(const Ring& ring);

}  // namespace resil::geo
