// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "npnkit/geo.hpp"

namespace npnkit {

// One scanner record. Optional link metrics stay absent when the log did
// not report them; they are never silently zero-filled.
struct Sample {
    double t = 0.0; // seconds, scanner clock
    GeoPoint pos;
    double rsrp_dbm = 0.0;
    std::optional<double> rsrq_db;
    std::optional<double> sinr_db;
    std::optional<double> rssi_dbm;
};

inline void validate(const Sample& s) {
    if (!std::isfinite(s.rsrp_dbm) || s.rsrp_dbm < -200.0 || s.rsrp_dbm > 0.0)
        throw std::invalid_argument("Sample: rsrp out of range [-200, 0] dBm");
}

// One drone telemetry record: exact horizontal fix plus barometric altitude.
struct TelemetryPoint {
    double t = 0.0; // seconds, drone clock
    double x = 0.0;
    double y = 0.0;
    double alt_baro = 0.0;
};

enum class RouteLabel { main_lobe, side_lobe, back_lobe };

inline std::string to_string(RouteLabel l) {
    switch (l) {
        case RouteLabel::main_lobe: return "main_lobe";
        case RouteLabel::side_lobe: return "side_lobe";
        case RouteLabel::back_lobe: return "back_lobe";
    }
    return "main_lobe";
}

inline RouteLabel route_label_from_string(const std::string& s) {
    if (s == "main_lobe") return RouteLabel::main_lobe;
    if (s == "side_lobe") return RouteLabel::side_lobe;
    if (s == "back_lobe") return RouteLabel::back_lobe;
    throw std::invalid_argument("unknown route label: " + s);
}

// A pre-programmed constant-altitude flight leg.
struct Route {
    int id = 0;
    std::vector<GeoPoint> waypoints;
    double leg_altitude = 0.0;
    RouteLabel label = RouteLabel::main_lobe;
};

inline void validate(const Route& r) {
    if (r.id < 1) throw std::invalid_argument("Route: id must be a positive integer");
    if (r.waypoints.size() < 2) throw std::invalid_argument("Route: needs at least 2 waypoints");
    for (const auto& w : r.waypoints) {
        if (!finite(w)) throw std::invalid_argument("Route: non-finite waypoint");
        if (w.z < kMinAltitudeM) throw std::invalid_argument("Route: waypoint below takeoff plane");
        if (std::abs(w.z - r.leg_altitude) > 1e-9)
            throw std::invalid_argument("Route: waypoint altitude differs from leg altitude");
    }
}

// Horizontal distance to the nearest route leg plus vertical distance to
// the leg altitude. Supports on-route filtering of fused samples.
inline std::pair<double, double> point_to_polyline_distance(const GeoPoint& p, const Route& r) {
    if (r.waypoints.size() < 2)
        throw std::invalid_argument("point_to_polyline_distance: empty route");
    const auto proj = project_to_polyline_2d(r.waypoints, p.x, p.y);
    return {proj.distance, std::abs(p.z - r.leg_altitude)};
}

// Three-level piecewise-constant azimuth pattern: main lobe inside
// main_halfwidth of boresight, side lobe out to side_sector, back lobe
// beyond. No elevation dependence.
struct AntennaPattern {
    double boresight_azimuth_deg = 90.0; // compass, default due east
    double main_gain_dbi = 15.0;
    double side_gain_dbi = 5.0;
    double back_gain_dbi = 0.0;
    double main_halfwidth_deg = 35.0;
    double side_sector_deg = 110.0;

    double gain_dbi(double azimuth_deg) const {
        const double off = std::abs(azimuth_difference_deg(azimuth_deg, boresight_azimuth_deg));
        if (off <= main_halfwidth_deg) return main_gain_dbi;
        if (off <= side_sector_deg) return side_gain_dbi;
        return back_gain_dbi;
    }
};

inline void validate(const AntennaPattern& a) {
    if (!(a.main_gain_dbi >= a.side_gain_dbi && a.side_gain_dbi >= a.back_gain_dbi))
        throw std::invalid_argument("AntennaPattern: gains must satisfy main >= side >= back");
    if (!(a.main_halfwidth_deg > 0.0 && a.main_halfwidth_deg < 180.0))
        throw std::invalid_argument("AntennaPattern: main_halfwidth must be in (0, 180)");
    if (a.side_sector_deg < a.main_halfwidth_deg)
        throw std::invalid_argument("AntennaPattern: side_sector must cover the main lobe");
}

// Rectangular single-storey building. Window spans are y-intervals on the
// east wall (the paper's building has its tall windows there); the roof
// carries one window rectangle. Interior walls are north-south partitions
// at fixed x positions.
struct BuildingModel {
    Rect footprint;
    double roof_height_m = 8.0;
    double wall_loss_db = 20.0;
    double window_loss_db = 5.0;
    std::vector<Interval> east_window_spans;
    Rect roof_window;
    double interior_wall_loss_db = 5.0;
    int max_interior_walls = 2;
    std::vector<double> interior_wall_x;
};

inline void validate(const BuildingModel& b) {
    if (!b.footprint.valid() || b.footprint.width() <= 0.0 || b.footprint.height() <= 0.0)
        throw std::invalid_argument("BuildingModel: degenerate footprint");
    if (b.roof_height_m <= 0.0) throw std::invalid_argument("BuildingModel: roof height <= 0");
    if (b.wall_loss_db < 0.0 || b.window_loss_db < 0.0 || b.interior_wall_loss_db < 0.0)
        throw std::invalid_argument("BuildingModel: losses must be >= 0");
    if (b.window_loss_db > b.wall_loss_db)
        throw std::invalid_argument("BuildingModel: window loss exceeds wall loss");
    if (b.max_interior_walls < 0 || b.max_interior_walls > 2)
        throw std::invalid_argument("BuildingModel: max_interior_walls must be 0..2");
    for (const auto& w : b.east_window_spans)
        if (!w.valid()) throw std::invalid_argument("BuildingModel: bad window span");
}

// Log-distance path loss: loss(d) = intercept + 10 n log10(d), with
// lognormal shadowing of standard deviation sigma around the mean line.
struct PathLossModel {
    double intercept_db = 43.5; // loss at 1 m
    double exponent_n = 2.0;
    double sigma_db = 0.0;
    double censor_threshold_dbm = -140.0;
};

inline void validate(const PathLossModel& m) {
    if (m.exponent_n <= 0.0) throw std::invalid_argument("PathLossModel: exponent must be > 0");
    if (m.sigma_db < 0.0) throw std::invalid_argument("PathLossModel: sigma must be >= 0");
}

enum class LimitKind { field_strength, rx_power, inr };

inline std::string to_string(LimitKind k) {
    switch (k) {
        case LimitKind::field_strength: return "field_strength";
        case LimitKind::rx_power: return "rx_power";
        case LimitKind::inr: return "inr";
    }
    return "rx_power";
}

inline LimitKind limit_kind_from_string(const std::string& s) {
    if (s == "field_strength") return LimitKind::field_strength;
    if (s == "rx_power") return LimitKind::rx_power;
    if (s == "inr") return LimitKind::inr;
    throw std::invalid_argument("unknown limit kind: " + s);
}

// A regulatory emission limit as published: field strength in dBuV/m per
// measurement bandwidth, a received-power level in dBm, or an I/N planning
// threshold in dB.
struct RegulatoryLimit {
    LimitKind kind = LimitKind::rx_power;
    double value = 0.0;
    std::string unit;
    double meas_bandwidth_hz = 0.0;
    double eval_height_m = 0.0;
    double antenna_gain_dbi = 0.0;
};

inline void validate(const RegulatoryLimit& l) {
    if (!std::isfinite(l.value)) throw std::invalid_argument("RegulatoryLimit: non-finite value");
    if (l.kind != LimitKind::inr && l.meas_bandwidth_hz <= 0.0)
        throw std::invalid_argument("RegulatoryLimit: measurement bandwidth must be > 0");
}

} // namespace npnkit
