// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "npnkit/fuse.hpp"
#include "npnkit/io.hpp"
#include "npnkit/plan.hpp"
#include "npnkit/simulate.hpp"

namespace npnkit {

struct AnalysisConfig {
    double heatmap_cell_m = 1.0;
    double heatmap_radius_m = 3.0;
    double idw_power = 2.0;
    std::size_t truncation_bounds = 10;
    double ref_bandwidth_hz = 30e3; // RSRP resource-element reference bandwidth
};

// Everything one reproducible run needs: emitter, virtual scanner,
// campaign geometry, fusion tolerances, analysis settings, and the limits
// to check against. All randomness flows from the single seed.
struct Scenario {
    GeoOrigin origin{60.0, 24.0};
    std::uint64_t seed = 1;
    EmissionScenario emission;
    ScannerProfile scanner;
    PlanParams plan;
    FusionConfig fusion;
    AnalysisConfig analysis;
    double speed_mps = 3.0;
    std::vector<std::filesystem::path> limit_files; // resolved against base_dir
    std::filesystem::path base_dir;
};

namespace detail {

inline void require_keys(const json& obj, const char* ctx,
                         std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw std::runtime_error(std::string("scenario: ") + ctx + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::runtime_error(std::string("scenario: unknown key '") + it.key() + "' in " +
                                     ctx);
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : it->get<T>();
}

inline Rect rect_from_json(const json& j, const char* ctx) {
    if (!j.is_array() || j.size() != 4)
        throw std::runtime_error(std::string("scenario: ") + ctx +
                                 " must be [min_x, min_y, max_x, max_y]");
    return Rect{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                j.at(3).get<double>()};
}

inline std::vector<Interval> intervals_from_json(const json& j, const char* ctx) {
    std::vector<Interval> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw std::runtime_error(std::string("scenario: ") + ctx + " entries must be [lo, hi]");
        out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    }
    return out;
}

} // namespace detail

inline Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir = ".") {
    detail::require_keys(j, "scenario root",
                         {"seed", "origin", "bs", "antenna", "building", "pathloss", "shadowing",
                          "scanner", "flight", "plan", "fusion", "analysis", "limits"});
    Scenario s;
    s.base_dir = base_dir;
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    s.emission.shadow_seed = s.seed;

    if (j.contains("origin")) {
        const auto& o = j.at("origin");
        detail::require_keys(o, "origin", {"lat_deg", "lon_deg"});
        s.origin.lat_deg = detail::get_or(o, "lat_deg", 60.0);
        s.origin.lon_deg = detail::get_or(o, "lon_deg", 24.0);
    }

    if (j.contains("bs")) {
        const auto& b = j.at("bs");
        detail::require_keys(b, "bs", {"pos_m", "tx_power_dbm", "carrier_hz"});
        if (b.contains("pos_m")) {
            const auto& p = b.at("pos_m");
            if (!p.is_array() || p.size() != 3)
                throw std::runtime_error("scenario: bs.pos_m must be [x, y, z]");
            s.emission.bs_pos = {p.at(0).get<double>(), p.at(1).get<double>(),
                                 p.at(2).get<double>()};
        }
        s.emission.tx_power_dbm = detail::get_or(b, "tx_power_dbm", 33.0);
        s.emission.carrier_hz = detail::get_or(b, "carrier_hz", 3.55e9);
    }

    if (j.contains("antenna")) {
        const auto& a = j.at("antenna");
        detail::require_keys(a, "antenna",
                             {"boresight_azimuth_deg", "main_gain_dbi", "side_gain_dbi",
                              "back_gain_dbi", "main_halfwidth_deg", "side_sector_deg"});
        auto& ant = s.emission.antenna;
        ant.boresight_azimuth_deg = detail::get_or(a, "boresight_azimuth_deg", 90.0);
        ant.main_gain_dbi = detail::get_or(a, "main_gain_dbi", 15.0);
        ant.side_gain_dbi = detail::get_or(a, "side_gain_dbi", 5.0);
        ant.back_gain_dbi = detail::get_or(a, "back_gain_dbi", 0.0);
        ant.main_halfwidth_deg = detail::get_or(a, "main_halfwidth_deg", 35.0);
        ant.side_sector_deg = detail::get_or(a, "side_sector_deg", 110.0);
    }

    if (j.contains("building") && !j.at("building").is_null()) {
        const auto& b = j.at("building");
        detail::require_keys(b, "building",
                             {"footprint_m", "roof_height_m", "wall_loss_db", "window_loss_db",
                              "east_window_spans_m", "roof_window_m", "interior_wall_loss_db",
                              "max_interior_walls", "interior_wall_x_m"});
        BuildingModel bm;
        bm.footprint = detail::rect_from_json(b.at("footprint_m"), "building.footprint_m");
        bm.roof_height_m = detail::get_or(b, "roof_height_m", 8.0);
        bm.wall_loss_db = detail::get_or(b, "wall_loss_db", 20.0);
        bm.window_loss_db = detail::get_or(b, "window_loss_db", 5.0);
        if (b.contains("east_window_spans_m"))
            bm.east_window_spans =
                detail::intervals_from_json(b.at("east_window_spans_m"), "east_window_spans_m");
        if (b.contains("roof_window_m"))
            bm.roof_window = detail::rect_from_json(b.at("roof_window_m"), "roof_window_m");
        bm.interior_wall_loss_db = detail::get_or(b, "interior_wall_loss_db", 5.0);
        bm.max_interior_walls = detail::get_or(b, "max_interior_walls", 2);
        bm.interior_wall_x = detail::get_or(b, "interior_wall_x_m", std::vector<double>{});
        s.emission.building = std::move(bm);
    }

    if (j.contains("pathloss")) {
        const auto& p = j.at("pathloss");
        detail::require_keys(p, "pathloss",
                             {"intercept_db", "exponent_n", "sigma_db", "censor_threshold_dbm"});
        s.emission.pathloss.intercept_db = detail::get_or(p, "intercept_db", 43.5);
        s.emission.pathloss.exponent_n = detail::get_or(p, "exponent_n", 2.0);
        s.emission.pathloss.sigma_db = detail::get_or(p, "sigma_db", 0.0);
        s.emission.pathloss.censor_threshold_dbm =
            detail::get_or(p, "censor_threshold_dbm", -140.0);
    }

    if (j.contains("shadowing")) {
        const auto& sh = j.at("shadowing");
        detail::require_keys(sh, "shadowing", {"correlation_m", "grid_spacing_m"});
        s.emission.shadowing_cfg.correlation_m = detail::get_or(sh, "correlation_m", 5.0);
        s.emission.shadowing_cfg.grid_spacing_m = detail::get_or(sh, "grid_spacing_m", 1.0);
    }

    if (j.contains("scanner")) {
        const auto& sc = j.at("scanner");
        detail::require_keys(sc, "scanner",
                             {"sample_rate_hz", "sensitivity_dbm", "gps_alt_noise_sigma_m",
                              "gps_horiz_noise_sigma_m", "clock_offset_s", "below_floor_policy"});
        s.scanner.sample_rate_hz = detail::get_or(sc, "sample_rate_hz", 5.0);
        s.scanner.sensitivity_dbm = detail::get_or(sc, "sensitivity_dbm", -140.0);
        s.scanner.gps_alt_noise_sigma_m = detail::get_or(sc, "gps_alt_noise_sigma_m", 3.0);
        s.scanner.gps_horiz_noise_sigma_m = detail::get_or(sc, "gps_horiz_noise_sigma_m", 0.5);
        s.scanner.clock_offset_s = detail::get_or(sc, "clock_offset_s", 0.0);
        s.scanner.below_floor_policy = below_floor_policy_from_string(
            detail::get_or<std::string>(sc, "below_floor_policy", "drop"));
    }

    if (j.contains("flight")) {
        const auto& f = j.at("flight");
        detail::require_keys(f, "flight", {"speed_mps"});
        s.speed_mps = detail::get_or(f, "speed_mps", 3.0);
    }

    if (j.contains("plan")) {
        const auto& p = j.at("plan");
        detail::require_keys(p, "plan",
                             {"heights_main_m", "height_side_m", "height_roof_m", "repeats",
                              "standoff_m", "length_m", "side_standoff_m", "side_length_m",
                              "roof_passes", "roof_margin_m", "terrain_mask_m"});
        s.plan.heights_main = detail::get_or(p, "heights_main_m", s.plan.heights_main);
        s.plan.height_side = detail::get_or(p, "height_side_m", 5.0);
        s.plan.height_roof = detail::get_or(p, "height_roof_m", 18.0);
        s.plan.repeats = detail::get_or(p, "repeats", 1);
        s.plan.standoff_m = detail::get_or(p, "standoff_m", 25.0);
        s.plan.length_m = detail::get_or(p, "length_m", 120.0);
        s.plan.side_standoff_m = detail::get_or(p, "side_standoff_m", 15.0);
        s.plan.side_length_m = detail::get_or(p, "side_length_m", 80.0);
        s.plan.roof_passes = detail::get_or(p, "roof_passes", 3);
        s.plan.roof_margin_m = detail::get_or(p, "roof_margin_m", 10.0);
        if (p.contains("terrain_mask_m"))
            s.plan.terrain_mask = detail::intervals_from_json(p.at("terrain_mask_m"),
                                                              "terrain_mask_m");
    }

    if (j.contains("fusion")) {
        const auto& f = j.at("fusion");
        detail::require_keys(f, "fusion",
                             {"time_tolerance_s", "horiz_gate_m", "vert_gate_m",
                              "offset_search_window_s", "replace_horizontal"});
        s.fusion.time_tolerance_s = detail::get_or(f, "time_tolerance_s", 0.5);
        s.fusion.horiz_gate_m = detail::get_or(f, "horiz_gate_m", 3.0);
        s.fusion.vert_gate_m = detail::get_or(f, "vert_gate_m", 1.5);
        s.fusion.offset_search_window_s = detail::get_or(f, "offset_search_window_s", 10.0);
        s.fusion.replace_horizontal = detail::get_or(f, "replace_horizontal", false);
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        detail::require_keys(a, "analysis",
                             {"heatmap_cell_m", "heatmap_radius_m", "idw_power",
                              "truncation_bounds", "ref_bandwidth_hz"});
        s.analysis.heatmap_cell_m = detail::get_or(a, "heatmap_cell_m", 1.0);
        s.analysis.heatmap_radius_m = detail::get_or(a, "heatmap_radius_m", 3.0);
        s.analysis.idw_power = detail::get_or(a, "idw_power", 2.0);
        s.analysis.truncation_bounds = detail::get_or<std::size_t>(a, "truncation_bounds", 10);
        s.analysis.ref_bandwidth_hz = detail::get_or(a, "ref_bandwidth_hz", 30e3);
    }

    if (j.contains("limits")) {
        for (const auto& l : j.at("limits"))
            s.limit_files.push_back(base_dir / l.get<std::string>());
    }

    validate(s.emission);
    validate(s.scanner);
    validate(s.fusion);
    if (s.speed_mps <= 0.0) throw std::runtime_error("scenario: flight.speed_mps must be > 0");
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario: " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j, path.parent_path().empty() ? "." : path.parent_path());
}

} // namespace npnkit
