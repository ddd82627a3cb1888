// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "npnkit/geo.hpp"
#include "npnkit/rng.hpp"
#include "npnkit/shadowing.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

// Telemetry logger rate of the flight controller.
constexpr double kTelemetryRateHz = 10.0;

struct ShadowingConfig {
    double correlation_m = 5.0;
    double grid_spacing_m = 1.0;
};

// Ground truth emitter: indoor BS, optional building shell, log-distance
// path loss with seeded shadowing. Evaluation is pure given the seed.
struct EmissionScenario {
    GeoPoint bs_pos{0.0, 0.0, 2.0};
    double tx_power_dbm = 33.0; // 2 W
    double carrier_hz = 3.55e9;
    AntennaPattern antenna;
    std::optional<BuildingModel> building;
    PathLossModel pathloss;
    std::uint64_t shadow_seed = 1;
    ShadowingConfig shadowing_cfg;

    const ShadowingField& shadowing() const {
        static std::mutex init_mutex;
        std::lock_guard<std::mutex> lock(init_mutex);
        if (!shadow_cache_)
            shadow_cache_ = std::make_shared<ShadowingField>(shadow_seed, pathloss.sigma_db,
                                                             shadowing_cfg.correlation_m,
                                                             shadowing_cfg.grid_spacing_m);
        return *shadow_cache_;
    }

  private:
    // Copies share the cache; the field is a pure function of the seed, so
    // sharing only saves recomputation.
    mutable std::shared_ptr<ShadowingField> shadow_cache_;
};

inline void validate(const EmissionScenario& s) {
    if (s.carrier_hz <= 0.0) throw std::invalid_argument("EmissionScenario: carrier must be > 0");
    if (s.tx_power_dbm > 50.0)
        throw std::invalid_argument("EmissionScenario: tx power above 50 dBm");
    if (!finite(s.bs_pos)) throw std::invalid_argument("EmissionScenario: non-finite BS position");
    validate(s.antenna);
    validate(s.pathloss);
    if (s.building) {
        validate(*s.building);
        const auto& b = *s.building;
        if (!b.footprint.contains(s.bs_pos.x, s.bs_pos.y) || s.bs_pos.z < 0.0 ||
            s.bs_pos.z > b.roof_height_m)
            throw std::invalid_argument("EmissionScenario: BS must be inside the building");
    }
}

enum class BelowFloorPolicy { drop, clamp };

inline std::string to_string(BelowFloorPolicy p) {
    return p == BelowFloorPolicy::drop ? "drop" : "clamp";
}

inline BelowFloorPolicy below_floor_policy_from_string(const std::string& s) {
    if (s == "drop") return BelowFloorPolicy::drop;
    if (s == "clamp") return BelowFloorPolicy::clamp;
    throw std::invalid_argument("unknown below_floor_policy: " + s);
}

// Virtual scanner characteristics. The GPS altitude error dwarfs the
// horizontal error, mirroring what real scanner fixes look like.
struct ScannerProfile {
    double sample_rate_hz = 5.0;
    double sensitivity_dbm = -140.0;
    double gps_alt_noise_sigma_m = 3.0;
    double gps_horiz_noise_sigma_m = 0.5;
    double clock_offset_s = 0.0; // scanner clock minus drone clock
    BelowFloorPolicy below_floor_policy = BelowFloorPolicy::drop;
};

inline void validate(const ScannerProfile& p) {
    if (p.sample_rate_hz <= 0.0) throw std::invalid_argument("ScannerProfile: sample rate <= 0");
    if (p.gps_alt_noise_sigma_m < 0.0 || p.gps_horiz_noise_sigma_m < 0.0)
        throw std::invalid_argument("ScannerProfile: noise sigmas must be >= 0");
}

inline bool inside_building(const BuildingModel& b, const GeoPoint& p) {
    return b.footprint.contains(p.x, p.y) && p.z < b.roof_height_m;
}

namespace detail {

// Exit of the segment bs -> p from the building box (bs strictly inside,
// p outside). Returns the segment parameter and which face was crossed.
enum class ExitFace { east, west, north, south, roof, floor };

struct BoxExit {
    double t;
    ExitFace face;
};

inline BoxExit building_exit(const BuildingModel& b, const GeoPoint& bs, const GeoPoint& p) {
    const double dx = p.x - bs.x, dy = p.y - bs.y, dz = p.z - bs.z;
    const double inf = std::numeric_limits<double>::infinity();
    BoxExit best{inf, ExitFace::east};
    auto consider = [&best](double t, ExitFace f) {
        if (t > 0.0 && t < best.t) best = {t, f};
    };
    if (dx > 0.0) consider((b.footprint.max_x - bs.x) / dx, ExitFace::east);
    if (dx < 0.0) consider((b.footprint.min_x - bs.x) / dx, ExitFace::west);
    if (dy > 0.0) consider((b.footprint.max_y - bs.y) / dy, ExitFace::north);
    if (dy < 0.0) consider((b.footprint.min_y - bs.y) / dy, ExitFace::south);
    if (dz > 0.0) consider((b.roof_height_m - bs.z) / dz, ExitFace::roof);
    if (dz < 0.0) consider((0.0 - bs.z) / dz, ExitFace::floor);
    if (!std::isfinite(best.t))
        throw std::logic_error("building_exit: ray does not leave the building");
    return best;
}

} // namespace detail

// Total penetration loss along the straight ray BS -> p: one exterior
// crossing (wall or window, depending on where the ray exits) plus the
// interior partitions crossed on the way, capped at max_interior_walls.
inline double penetration_loss_db(const BuildingModel& b, const GeoPoint& bs, const GeoPoint& p) {
    const auto exit = detail::building_exit(b, bs, p);
    const double ex = bs.x + exit.t * (p.x - bs.x);
    const double ey = bs.y + exit.t * (p.y - bs.y);

    double loss = b.wall_loss_db;
    if (exit.face == detail::ExitFace::east) {
        for (const auto& span : b.east_window_spans)
            if (span.contains(ey)) {
                loss = b.window_loss_db;
                break;
            }
    } else if (exit.face == detail::ExitFace::roof) {
        if (b.roof_window.contains(ex, ey)) loss = b.window_loss_db;
    }

    int crossed = 0;
    const double dx = p.x - bs.x;
    if (dx != 0.0) {
        for (double wx : b.interior_wall_x) {
            const double t = (wx - bs.x) / dx;
            if (t <= 0.0 || t >= exit.t) continue;
            const double y = bs.y + t * (p.y - bs.y);
            const double z = bs.z + t * (p.z - bs.z);
            if (y >= b.footprint.min_y && y <= b.footprint.max_y && z >= 0.0 &&
                z <= b.roof_height_m)
                ++crossed;
        }
    }
    crossed = std::min(crossed, b.max_interior_walls);
    return loss + crossed * b.interior_wall_loss_db;
}

// Ground-truth RSRP at a point outside the building (or above its roof).
inline double true_rsrp(const EmissionScenario& scn, const GeoPoint& p) {
    if (!finite(p)) throw std::invalid_argument("true_rsrp: non-finite point");
    if (scn.building && inside_building(*scn.building, p))
        throw std::invalid_argument("true_rsrp: point inside the building footprint below roof");
    const double d = distance_3d(scn.bs_pos, p);
    if (d <= 0.0) throw std::invalid_argument("true_rsrp: point coincides with the BS");

    const double gain = scn.antenna.gain_dbi(azimuth_deg(scn.bs_pos, p));
    const double path = scn.pathloss.intercept_db + 10.0 * scn.pathloss.exponent_n * std::log10(d);
    const double pen = scn.building ? penetration_loss_db(*scn.building, scn.bs_pos, p) : 0.0;
    return scn.tx_power_dbm + gain - path - pen + scn.shadowing().at(p);
}

struct FlightLogs {
    std::vector<Sample> scanner;
    std::vector<TelemetryPoint> telemetry;
};

// Simulate one constant-speed traversal of a route. Telemetry carries the
// exact trajectory at 10 Hz; the scanner log gets GPS position noise and a
// clock offset, and records below the sensitivity floor are dropped or
// clamped according to the profile.
inline FlightLogs fly(const EmissionScenario& scn, const ScannerProfile& prof, const Route& r,
                      double speed_mps, std::uint32_t flight_index = 0) {
    validate(scn);
    validate(prof);
    validate(r);
    if (speed_mps <= 0.0) throw std::invalid_argument("fly: speed must be > 0");
    const double total = polyline_length_2d(r.waypoints);
    if (total <= 0.0) throw std::invalid_argument("fly: degenerate route with zero length");
    const double duration = total / speed_mps;

    FlightLogs logs;

    const int n_tel = static_cast<int>(std::floor(duration * kTelemetryRateHz)) + 1;
    logs.telemetry.reserve(static_cast<std::size_t>(n_tel));
    for (int k = 0; k < n_tel; ++k) {
        const double t = k / kTelemetryRateHz;
        const GeoPoint pos = polyline_point_at(r.waypoints, speed_mps * t);
        logs.telemetry.push_back({t, pos.x, pos.y, pos.z});
    }

    SplitMix64 noise(mix_seed(scn.shadow_seed, 0x5ca77e72ULL, static_cast<std::uint64_t>(r.id),
                              flight_index));
    const double dt = 1.0 / prof.sample_rate_hz;
    const int n_scan = static_cast<int>(std::floor(duration / dt)) + 1;
    for (int j = 0; j < n_scan; ++j) {
        const double t = j * dt;
        const GeoPoint pos = polyline_point_at(r.waypoints, speed_mps * t);
        const double rsrp = true_rsrp(scn, pos);
        // Draw noise unconditionally so censoring does not shift the stream.
        const double nx = noise.normal() * prof.gps_horiz_noise_sigma_m;
        const double ny = noise.normal() * prof.gps_horiz_noise_sigma_m;
        const double nz = noise.normal() * prof.gps_alt_noise_sigma_m;
        Sample s;
        s.t = t + prof.clock_offset_s;
        s.pos = {pos.x + nx, pos.y + ny, pos.z + nz};
        s.rsrp_dbm = rsrp;
        if (rsrp < prof.sensitivity_dbm) {
            if (prof.below_floor_policy == BelowFloorPolicy::drop) continue;
            s.rsrp_dbm = prof.sensitivity_dbm;
        }
        logs.scanner.push_back(s);
    }
    return logs;
}

} // namespace npnkit
