// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "npnkit/analyze.hpp"
#include "npnkit/comply.hpp"
#include "npnkit/fuse.hpp"
#include "npnkit/geo.hpp"
#include "npnkit/plan.hpp"
#include "npnkit/simulate.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

using json = nlohmann::json;

namespace detail {

// Fixed-precision, locale-independent float formatting so repeated runs
// are byte-identical.
inline std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v, int precision) {
    return v ? fmt(*v, precision) : std::string();
}

} // namespace detail

// ---- flight logs ---------------------------------------------------------

inline std::string write_scanner_csv(const std::vector<Sample>& samples,
                                     const GeoOrigin& origin) {
    std::string out = kScannerCsvHeader;
    out += '\n';
    for (const auto& s : samples) {
        double lat, lon;
        local_to_geodetic(origin, s.pos.x, s.pos.y, lat, lon);
        out += detail::fmt(s.t, 3) + ',' + detail::fmt(lat, 9) + ',' + detail::fmt(lon, 9) + ',' +
               detail::fmt(s.pos.z, 3) + ',' + detail::fmt(s.rsrp_dbm, 3) + ',' +
               detail::fmt_opt(s.rsrq_db, 3) + ',' + detail::fmt_opt(s.sinr_db, 3) + ',' +
               detail::fmt_opt(s.rssi_dbm, 3) + '\n';
    }
    return out;
}

inline std::string write_telemetry_csv(const std::vector<TelemetryPoint>& tel,
                                       const GeoOrigin& origin) {
    std::string out = kTelemetryCsvHeader;
    out += '\n';
    for (const auto& p : tel) {
        double lat, lon;
        local_to_geodetic(origin, p.x, p.y, lat, lon);
        out += detail::fmt(p.t, 3) + ',' + detail::fmt(lat, 9) + ',' + detail::fmt(lon, 9) + ',' +
               detail::fmt(p.alt_baro, 3) + '\n';
    }
    return out;
}

inline std::string write_fused_csv(const std::vector<FusedSample>& fused) {
    std::string out = kFusedCsvHeader;
    out += '\n';
    for (const auto& f : fused) {
        out += detail::fmt(f.t, 3) + ',' + detail::fmt(f.pos.x, 4) + ',' +
               detail::fmt(f.pos.y, 4) + ',' + detail::fmt(f.pos.z, 4) + ',' +
               std::to_string(f.route_id) + ',' + detail::fmt(f.distance_to_bs, 4) + ',' +
               detail::fmt(f.rsrp_dbm, 3) + ',' + detail::fmt_opt(f.rsrq_db, 3) + ',' +
               detail::fmt_opt(f.sinr_db, 3) + ',' + detail::fmt_opt(f.rssi_dbm, 3) + '\n';
    }
    return out;
}

inline std::vector<FusedSample> parse_fused_csv(std::string_view text) {
    std::vector<FusedSample> out;
    detail::for_each_csv_row(text, kFusedCsvHeader, 10, [&](std::size_t line_no, const auto& f) {
        FusedSample s;
        s.t = detail::parse_finite(f[0], line_no, "time_s");
        s.pos.x = detail::parse_finite(f[1], line_no, "x_m");
        s.pos.y = detail::parse_finite(f[2], line_no, "y_m");
        s.pos.z = detail::parse_finite(f[3], line_no, "z_m");
        s.route_id = static_cast<int>(detail::parse_finite(f[4], line_no, "route_id"));
        s.distance_to_bs = detail::parse_finite(f[5], line_no, "dist_bs_m");
        s.rsrp_dbm = detail::parse_finite(f[6], line_no, "rsrp_dbm");
        s.rsrq_db = detail::parse_optional(f[7], line_no, "rsrq_db");
        s.sinr_db = detail::parse_optional(f[8], line_no, "sinr_db");
        s.rssi_dbm = detail::parse_optional(f[9], line_no, "rssi_dbm");
        out.push_back(std::move(s));
    });
    return out;
}

// ---- plan ----------------------------------------------------------------

inline json plan_to_json(const CampaignPlan& plan) {
    json routes = json::array();
    for (const auto& r : plan.routes) {
        json wps = json::array();
        for (const auto& w : r.waypoints) wps.push_back({w.x, w.y, w.z});
        routes.push_back({{"id", r.id},
                          {"label", to_string(r.label)},
                          {"leg_altitude_m", r.leg_altitude},
                          {"waypoints_m", wps}});
    }
    return json{{"routes", routes},
                {"heights_main_m", plan.heights_main},
                {"height_side_m", plan.height_side},
                {"height_roof_m", plan.height_roof},
                {"repeats", plan.repeats}};
}

inline CampaignPlan plan_from_json(const json& j) {
    CampaignPlan plan;
    plan.heights_main = j.at("heights_main_m").get<std::vector<double>>();
    plan.height_side = j.at("height_side_m").get<double>();
    plan.height_roof = j.at("height_roof_m").get<double>();
    plan.repeats = j.at("repeats").get<int>();
    for (const auto& rj : j.at("routes")) {
        Route r;
        r.id = rj.at("id").get<int>();
        r.label = route_label_from_string(rj.at("label").get<std::string>());
        r.leg_altitude = rj.at("leg_altitude_m").get<double>();
        for (const auto& wj : rj.at("waypoints_m"))
            r.waypoints.push_back({wj.at(0).get<double>(), wj.at(1).get<double>(),
                                   wj.at(2).get<double>()});
        validate(r);
        plan.routes.push_back(std::move(r));
    }
    validate(plan);
    return plan;
}

// ---- analysis products ----------------------------------------------------

inline std::string heatmap_to_csv(const HeatmapGrid& grid) {
    std::string out = "alt_m\\arclen_m";
    for (std::size_t i = 0; i < grid.nu; ++i) out += ',' + detail::fmt(grid.u_center(i), 2);
    out += '\n';
    for (std::size_t j = 0; j < grid.nv; ++j) {
        out += detail::fmt(grid.v_center(j), 2);
        for (std::size_t i = 0; i < grid.nu; ++i) {
            out += ',';
            if (!grid.empty_cell(i, j)) out += detail::fmt(grid.at(i, j), 3);
        }
        out += '\n';
    }
    return out;
}

// Cell centers as GeoJSON points: position mapped back onto the route
// polyline at the cell's arclength, at the cell's altitude.
inline json heatmap_to_geojson(const HeatmapGrid& grid, const Route& route,
                               const GeoOrigin& origin) {
    json features = json::array();
    for (std::size_t j = 0; j < grid.nv; ++j)
        for (std::size_t i = 0; i < grid.nu; ++i) {
            if (grid.empty_cell(i, j)) continue;
            const GeoPoint p = polyline_point_at(route.waypoints, grid.u_center(i));
            double lat, lon;
            local_to_geodetic(origin, p.x, p.y, lat, lon);
            features.push_back(
                {{"type", "Feature"},
                 {"geometry", {{"type", "Point"}, {"coordinates", {lon, lat}}}},
                 {"properties",
                  {{"rsrp_dbm", grid.at(i, j)},
                   {"arclength_m", grid.u_center(i)},
                   {"alt_m", grid.v_center(j)},
                   {"route_id", route.id}}}});
        }
    return json{{"type", "FeatureCollection"}, {"features", features}};
}

inline json ecdf_to_json(const std::vector<Ecdf>& groups) {
    json out = json::array();
    for (const auto& g : groups)
        out.push_back({{"route_id", g.route_id},
                       {"altitude_m", g.altitude_m},
                       {"flight_index", g.flight_index},
                       {"n", g.values.size()},
                       {"min_dbm", g.min()},
                       {"max_dbm", g.max()},
                       {"values_dbm", g.values}});
    return json{{"cdfs", out}};
}

inline json regression_to_json(const RegressionResult& result) {
    json family = json::array();
    for (const auto& f : result.family)
        family.push_back({{"d_max_m", f.d_max_m},
                          {"intercept_dbm", f.intercept_dbm},
                          {"exponent_n", f.exponent_n},
                          {"sigma_resid_db", f.sigma_resid_db},
                          {"n_points", f.n_points},
                          {"censored_fraction", f.censored_fraction}});
    const Band band = reconstruct_band(result);
    return json{{"censor_threshold_dbm", result.censor_threshold_dbm},
                {"family", family},
                {"selected_index", result.selected},
                {"selection_within_threshold", result.selection_within_threshold},
                {"selected", family.at(result.selected)},
                {"residual_normality_a2", result.residual_normality_a2},
                // +/-3 sigma covers 99.7% of a normal sample
                {"band_sigma_multiple", 3.0},
                {"band_nominal_coverage", 0.997},
                {"band",
                 {{"distance_m", band.distance_m},
                  {"mean_dbm", band.mean_dbm},
                  {"lower_dbm", band.lower_dbm},
                  {"upper_dbm", band.upper_dbm}}}};
}

inline json limit_to_json(const RegulatoryLimit& l) {
    return json{{"kind", to_string(l.kind)},          {"value", l.value},
                {"unit", l.unit},                     {"meas_bandwidth_hz", l.meas_bandwidth_hz},
                {"eval_height_m", l.eval_height_m},   {"antenna_gain_dbi", l.antenna_gain_dbi}};
}

inline RegulatoryLimit limit_from_json(const json& j) {
    RegulatoryLimit l;
    l.kind = limit_kind_from_string(j.at("kind").get<std::string>());
    l.value = j.at("value").get<double>();
    l.unit = j.value("unit", std::string());
    l.meas_bandwidth_hz = j.value("meas_bandwidth_hz", 0.0);
    l.eval_height_m = j.value("eval_height_m", 0.0);
    l.antenna_gain_dbi = j.value("antenna_gain_dbi", 0.0);
    validate(l);
    return l;
}

inline json compliance_to_json(const ComplianceReport& report,
                               const std::vector<FusedSample>& samples) {
    json verdicts = json::array();
    for (std::size_t k = 0; k < report.verdicts.size(); ++k) {
        const auto& s = samples[report.evaluated_index[k]];
        verdicts.push_back({{"time_s", s.t},
                            {"rsrp_dbm", s.rsrp_dbm},
                            {"verdict", to_string(report.verdicts[k].verdict)},
                            {"margin_db", report.verdicts[k].margin_db}});
    }
    json worst = nullptr;
    if (report.worst_index) {
        const auto& s = samples[*report.worst_index];
        worst = json{{"time_s", s.t},   {"x_m", s.pos.x},         {"y_m", s.pos.y},
                     {"z_m", s.pos.z},  {"rsrp_dbm", s.rsrp_dbm}, {"route_id", s.route_id},
                     {"margin_db", report.worst_margin_db}};
    }
    return json{{"limit", limit_to_json(report.limit)},
                {"censor_threshold_dbm", report.censor_threshold_dbm},
                {"floor_limited", report.floor_limited},
                {"strict_height", report.strict_height},
                {"summary",
                 {{"evaluated", report.verdicts.size()},
                  {"pass", report.n_pass},
                  {"fail", report.n_fail},
                  {"below_measurement_floor", report.n_below_floor},
                  {"height_skipped", report.n_height_skipped}}},
                {"worst_case", worst},
                {"verdicts", verdicts}};
}

// ---- files -----------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write-temp-then-rename so partial output never lands under the final name.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace npnkit
