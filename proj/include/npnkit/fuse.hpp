// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "npnkit/geo.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

// Scanner sample joined with telemetry: timestamps on the drone clock,
// altitude taken from the barometer, and an on-route assignment.
struct FusedSample {
    double t = 0.0; // seconds, drone clock
    GeoPoint pos;   // z from telemetry
    double rsrp_dbm = 0.0;
    std::optional<double> rsrq_db;
    std::optional<double> sinr_db;
    std::optional<double> rssi_dbm;
    int route_id = 0;
    double distance_to_bs = 0.0;
};

struct FusionConfig {
    double time_tolerance_s = 0.5;
    double horiz_gate_m = 3.0;
    double vert_gate_m = 1.5;
    double offset_search_window_s = 10.0;
    bool replace_horizontal = false;
};

inline void validate(const FusionConfig& c) {
    if (c.time_tolerance_s <= 0.0 || c.horiz_gate_m <= 0.0 || c.vert_gate_m <= 0.0 ||
        c.offset_search_window_s <= 0.0)
        throw std::invalid_argument("FusionConfig: all tolerances must be positive");
}

constexpr const char* kScannerCsvHeader =
    "time_s,lat_deg,lon_deg,alt_m,rsrp_dbm,rsrq_db,sinr_db,rssi_dbm";
constexpr const char* kTelemetryCsvHeader = "time_s,lat_deg,lon_deg,alt_baro_m";
constexpr const char* kFusedCsvHeader =
    "time_s,x_m,y_m,z_m,route_id,dist_bs_m,rsrp_dbm,rsrq_db,sinr_db,rssi_dbm";

namespace detail {

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double parse_double(std::string_view field, std::size_t line_no, const char* name) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::runtime_error("line " + std::to_string(line_no) + ": malformed " + name +
                                 " field '" + std::string(field) + "'");
    return v;
}

inline double parse_finite(std::string_view field, std::size_t line_no, const char* name) {
    const double v = parse_double(field, line_no, name);
    if (!std::isfinite(v))
        throw std::runtime_error("line " + std::to_string(line_no) + ": non-finite " + name +
                                 " value '" + std::string(field) + "'");
    return v;
}

inline std::optional<double> parse_optional(std::string_view field, std::size_t line_no,
                                            const char* name) {
    if (field.empty()) return std::nullopt;
    return parse_finite(field, line_no, name);
}

// Iterates data rows, checking the header first. Callback receives the
// 1-based line number and the split fields.
template <typename RowFn>
void for_each_csv_row(std::string_view text, const char* expected_header, std::size_t n_fields,
                      RowFn&& fn) {
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = strip_cr(
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != expected_header)
                throw std::runtime_error("unexpected CSV header '" + std::string(line) +
                                         "', expected '" + expected_header + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != n_fields)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(n_fields) + " fields, got " +
                                     std::to_string(fields.size()));
        fn(line_no, fields);
    }
    if (!header_seen) throw std::runtime_error("empty file: missing CSV header");
}

} // namespace detail

// Scanner log rows become Samples in the local frame. Missing optional
// metrics stay absent; a malformed or non-finite required field is an
// error, never a silent sample.
inline std::vector<Sample> parse_scanner_csv(std::string_view text, const GeoOrigin& origin) {
    std::vector<Sample> out;
    detail::for_each_csv_row(
        text, kScannerCsvHeader, 8, [&](std::size_t line_no, const auto& f) {
            Sample s;
            s.t = detail::parse_finite(f[0], line_no, "time_s");
            const double lat = detail::parse_finite(f[1], line_no, "lat_deg");
            const double lon = detail::parse_finite(f[2], line_no, "lon_deg");
            geodetic_to_local(origin, lat, lon, s.pos.x, s.pos.y);
            // Scanner GPS altitude is kept verbatim; fusion replaces it.
            s.pos.z = detail::parse_finite(f[3], line_no, "alt_m");
            s.rsrp_dbm = detail::parse_finite(f[4], line_no, "rsrp_dbm");
            if (s.rsrp_dbm < -200.0 || s.rsrp_dbm > 0.0)
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": rsrp out of range [-200, 0] dBm");
            s.rsrq_db = detail::parse_optional(f[5], line_no, "rsrq_db");
            s.sinr_db = detail::parse_optional(f[6], line_no, "sinr_db");
            s.rssi_dbm = detail::parse_optional(f[7], line_no, "rssi_dbm");
            out.push_back(std::move(s));
        });
    return out;
}

inline std::vector<TelemetryPoint> parse_telemetry_csv(std::string_view text,
                                                       const GeoOrigin& origin) {
    std::vector<TelemetryPoint> out;
    detail::for_each_csv_row(
        text, kTelemetryCsvHeader, 4, [&](std::size_t line_no, const auto& f) {
            TelemetryPoint p;
            p.t = detail::parse_finite(f[0], line_no, "time_s");
            const double lat = detail::parse_finite(f[1], line_no, "lat_deg");
            const double lon = detail::parse_finite(f[2], line_no, "lon_deg");
            geodetic_to_local(origin, lat, lon, p.x, p.y);
            p.alt_baro = detail::parse_finite(f[3], line_no, "alt_baro_m");
            if (!out.empty() && p.t < out.back().t)
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": non-monotonic telemetry time");
            out.push_back(p);
        });
    return out;
}

namespace detail {

struct TelemetryInterp {
    double x, y, alt;
};

// Piecewise-linear interpolation; t must be inside [front.t, back.t].
inline TelemetryInterp interp_telemetry(const std::vector<TelemetryPoint>& tel, double t) {
    const auto it = std::lower_bound(tel.begin(), tel.end(), t,
                                     [](const TelemetryPoint& p, double v) { return p.t < v; });
    if (it == tel.begin()) return {it->x, it->y, it->alt_baro};
    if (it == tel.end()) return {tel.back().x, tel.back().y, tel.back().alt_baro};
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double span = b.t - a.t;
    const double w = span > 0.0 ? (t - a.t) / span : 0.0;
    return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y),
            a.alt_baro + w * (b.alt_baro - a.alt_baro)};
}

inline double horizontal_extent(const std::vector<TelemetryPoint>& tel) {
    double min_x = tel.front().x, max_x = min_x, min_y = tel.front().y, max_y = min_y;
    for (const auto& p : tel) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    return std::hypot(max_x - min_x, max_y - min_y);
}

inline double sample_horizontal_extent(const std::vector<Sample>& scan) {
    double min_x = scan.front().pos.x, max_x = min_x, min_y = scan.front().pos.y, max_y = min_y;
    for (const auto& s : scan) {
        min_x = std::min(min_x, s.pos.x);
        max_x = std::max(max_x, s.pos.x);
        min_y = std::min(min_y, s.pos.y);
        max_y = std::max(max_y, s.pos.y);
    }
    return std::hypot(max_x - min_x, max_y - min_y);
}

} // namespace detail

// Clock offset (scanner clock minus drone clock) by trajectory alignment:
// grid search at 0.05 s resolution for the shift that minimizes the mean
// horizontal distance between scanner fixes and the interpolated
// telemetry track. Neither clock is trusted.
inline double estimate_clock_offset(const std::vector<Sample>& scan,
                                    const std::vector<TelemetryPoint>& tel,
                                    const FusionConfig& cfg = {}) {
    validate(cfg);
    if (scan.size() < 2 || tel.size() < 2)
        throw std::runtime_error("estimate_clock_offset: logs too short");
    const double scan_span = scan.back().t - scan.front().t;
    const double tel_span = tel.back().t - tel.front().t;
    if (std::min(scan_span, tel_span) < 5.0)
        throw std::runtime_error("estimate_clock_offset: need >= 5 s of overlapping motion");
    if (detail::horizontal_extent(tel) < 1.0 || detail::sample_horizontal_extent(scan) < 1.0)
        throw std::runtime_error("estimate_clock_offset: offset unobservable (no motion)");

    constexpr double kStep = 0.05;
    const int n_steps = static_cast<int>(std::round(cfg.offset_search_window_s / kStep));
    double best_cost = std::numeric_limits<double>::infinity();
    double best_delta = 0.0;
    for (int i = -n_steps; i <= n_steps; ++i) {
        const double delta = i * kStep;
        double cost = 0.0;
        std::size_t n = 0;
        for (const auto& s : scan) {
            const double td = s.t - delta;
            if (td < tel.front().t || td > tel.back().t) continue;
            const auto p = detail::interp_telemetry(tel, td);
            cost += std::hypot(s.pos.x - p.x, s.pos.y - p.y);
            ++n;
        }
        if (n < std::max<std::size_t>(5, scan.size() / 5)) continue;
        cost /= static_cast<double>(n);
        if (cost < best_cost) {
            best_cost = cost;
            best_delta = delta;
        }
    }
    if (!std::isfinite(best_cost))
        throw std::runtime_error("estimate_clock_offset: logs do not overlap in any tested shift");
    return best_delta;
}

// Join scanner samples with telemetry at a known clock offset, replace
// the GPS altitude with the barometric one, and keep only samples within
// the gates of a pre-programmed route.
inline std::vector<FusedSample> fuse(const std::vector<Sample>& scan,
                                     const std::vector<TelemetryPoint>& tel,
                                     const std::vector<Route>& routes, const GeoPoint& bs_pos,
                                     const FusionConfig& cfg, double clock_offset_s) {
    validate(cfg);
    if (routes.empty()) throw std::invalid_argument("fuse: no routes given");
    for (const auto& r : routes) validate(r);
    if (scan.empty()) return {};
    if (tel.size() < 2) throw std::runtime_error("fuse: telemetry log too short");

    std::vector<FusedSample> out;
    std::size_t unmatched = 0;
    for (const auto& s : scan) {
        const double td = s.t - clock_offset_s;

        // Nearest telemetry in time; interpolate when a bracketing pair
        // sits inside the tolerance.
        const auto it = std::lower_bound(
            tel.begin(), tel.end(), td,
            [](const TelemetryPoint& p, double v) { return p.t < v; });
        const TelemetryPoint* after = it != tel.end() ? &*it : nullptr;
        const TelemetryPoint* before = it != tel.begin() ? &*(it - 1) : nullptr;
        const double d_after = after ? std::abs(after->t - td) : std::numeric_limits<double>::infinity();
        const double d_before =
            before ? std::abs(td - before->t) : std::numeric_limits<double>::infinity();

        detail::TelemetryInterp joined{};
        if (before && after && d_before <= cfg.time_tolerance_s &&
            d_after <= cfg.time_tolerance_s) {
            joined = detail::interp_telemetry(tel, td);
        } else if (std::min(d_before, d_after) <= cfg.time_tolerance_s) {
            const TelemetryPoint* np = d_before <= d_after ? before : after;
            joined = {np->x, np->y, np->alt_baro};
        } else {
            ++unmatched;
            continue;
        }

        FusedSample f;
        f.t = td;
        f.pos.x = cfg.replace_horizontal ? joined.x : s.pos.x;
        f.pos.y = cfg.replace_horizontal ? joined.y : s.pos.y;
        f.pos.z = joined.alt;
        f.rsrp_dbm = s.rsrp_dbm;
        f.rsrq_db = s.rsrq_db;
        f.sinr_db = s.sinr_db;
        f.rssi_dbm = s.rssi_dbm;

        // On-route gate; ties go to the lowest route id for determinism.
        const Route* chosen = nullptr;
        double chosen_h = std::numeric_limits<double>::infinity();
        for (const auto& r : routes) {
            const auto [h, v] = point_to_polyline_distance(f.pos, r);
            if (h > cfg.horiz_gate_m || v > cfg.vert_gate_m) continue;
            if (h < chosen_h - 1e-9 ||
                (std::abs(h - chosen_h) <= 1e-9 && chosen && r.id < chosen->id)) {
                chosen = &r;
                chosen_h = h;
            }
        }
        if (!chosen) continue;
        f.route_id = chosen->id;
        f.distance_to_bs = distance_3d(f.pos, bs_pos);
        out.push_back(std::move(f));
    }

    if (unmatched * 2 > scan.size())
        throw std::runtime_error("fuse: logs do not overlap (no telemetry within tolerance for >50% of samples)");
    return out;
}

// Convenience form that estimates the clock offset first.
inline std::vector<FusedSample> fuse(const std::vector<Sample>& scan,
                                     const std::vector<TelemetryPoint>& tel,
                                     const std::vector<Route>& routes, const GeoPoint& bs_pos,
                                     const FusionConfig& cfg = {}) {
    const double delta = estimate_clock_offset(scan, tel, cfg);
    return fuse(scan, tel, routes, bs_pos, cfg, delta);
}

} // namespace npnkit
