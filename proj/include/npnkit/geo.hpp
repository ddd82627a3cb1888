// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace npnkit {

// Local ENU metric frame: x east, y north, z above the takeoff plane.
// Conversion to/from geodetic coordinates happens only at the log
// boundaries (see geo_origin below); all internal geometry is metric.
struct GeoPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
};

// Axis-aligned rectangle in the horizontal plane.
struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    bool contains(double x, double y) const {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double center_x() const { return 0.5 * (min_x + max_x); }
    double center_y() const { return 0.5 * (min_y + max_y); }
    bool valid() const { return min_x <= max_x && min_y <= max_y; }
};

inline bool finite(const GeoPoint& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// Altitude may dip slightly below the takeoff plane (sloping ground).
constexpr double kMinAltitudeM = -0.5;

inline double distance_3d(const GeoPoint& p, const GeoPoint& q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double distance_2d(const GeoPoint& p, const GeoPoint& q) {
    return std::hypot(p.x - q.x, p.y - q.y);
}

// 2D distance from (px,py) to segment (ax,ay)-(bx,by).
inline double point_segment_distance_2d(double px, double py, double ax, double ay, double bx,
                                        double by) {
    const double vx = bx - ax;
    const double vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - ax) * vx + (py - ay) * vy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// Horizontal arclength of a waypoint polyline.
inline double polyline_length_2d(const std::vector<GeoPoint>& wps) {
    double s = 0.0;
    for (std::size_t i = 1; i < wps.size(); ++i) s += distance_2d(wps[i - 1], wps[i]);
    return s;
}

// Point on the polyline at horizontal arclength s (clamped to the ends).
inline GeoPoint polyline_point_at(const std::vector<GeoPoint>& wps, double s) {
    if (wps.empty()) throw std::invalid_argument("polyline_point_at: empty polyline");
    if (s <= 0.0) return wps.front();
    for (std::size_t i = 1; i < wps.size(); ++i) {
        const double leg = distance_2d(wps[i - 1], wps[i]);
        if (s <= leg && leg > 0.0) {
            const double t = s / leg;
            return {wps[i - 1].x + t * (wps[i].x - wps[i - 1].x),
                    wps[i - 1].y + t * (wps[i].y - wps[i - 1].y),
                    wps[i - 1].z + t * (wps[i].z - wps[i - 1].z)};
        }
        s -= leg;
    }
    return wps.back();
}

// Arclength of the closest point of the polyline to (px,py), plus the
// closest horizontal distance itself.
struct PolylineProjection {
    double arclength = 0.0;
    double distance = 0.0;
};

inline PolylineProjection project_to_polyline_2d(const std::vector<GeoPoint>& wps, double px,
                                                 double py) {
    if (wps.size() < 2) throw std::invalid_argument("project_to_polyline_2d: need >= 2 waypoints");
    PolylineProjection best{0.0, std::numeric_limits<double>::infinity()};
    double s_base = 0.0;
    for (std::size_t i = 1; i < wps.size(); ++i) {
        const double ax = wps[i - 1].x, ay = wps[i - 1].y;
        const double bx = wps[i].x, by = wps[i].y;
        const double vx = bx - ax, vy = by - ay;
        const double len2 = vx * vx + vy * vy;
        const double len = std::sqrt(len2);
        double t = 0.0;
        if (len2 > 0.0) t = std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
        const double d = std::hypot(px - (ax + t * vx), py - (ay + t * vy));
        if (d < best.distance) best = {s_base + t * len, d};
        s_base += len;
    }
    return best;
}

// Equirectangular approximation about a fixed origin. Good to well under
// 1 cm over the ~1 km extent of a measurement campaign.
struct GeoOrigin {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

namespace detail {
constexpr double kEarthRadiusM = 6378137.0;
constexpr double kDegToRad = 0.017453292519943295;
} // namespace detail

inline void geodetic_to_local(const GeoOrigin& o, double lat_deg, double lon_deg, double& x,
                              double& y) {
    const double coslat = std::cos(o.lat_deg * detail::kDegToRad);
    x = (lon_deg - o.lon_deg) * detail::kDegToRad * detail::kEarthRadiusM * coslat;
    y = (lat_deg - o.lat_deg) * detail::kDegToRad * detail::kEarthRadiusM;
}

inline void local_to_geodetic(const GeoOrigin& o, double x, double y, double& lat_deg,
                              double& lon_deg) {
    const double coslat = std::cos(o.lat_deg * detail::kDegToRad);
    lon_deg = o.lon_deg + x / (detail::kEarthRadiusM * coslat) / detail::kDegToRad;
    lat_deg = o.lat_deg + y / detail::kEarthRadiusM / detail::kDegToRad;
}

// Compass azimuth (degrees clockwise from north) of the horizontal
// direction from p to q.
inline double azimuth_deg(const GeoPoint& p, const GeoPoint& q) {
    const double az = std::atan2(q.x - p.x, q.y - p.y) / detail::kDegToRad;
    return az < 0.0 ? az + 360.0 : az;
}

// Signed smallest difference between two azimuths, in (-180, 180].
inline double azimuth_difference_deg(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

} // namespace npnkit
