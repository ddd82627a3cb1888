// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "npnkit/geo.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

struct CampaignPlan {
    std::vector<Route> routes;
    std::vector<double> heights_main;
    double height_side = 5.0;
    double height_roof = 18.0;
    int repeats = 1;
};

inline void validate(const CampaignPlan& p) {
    if (p.repeats < 1) throw std::invalid_argument("CampaignPlan: repeats must be >= 1");
    for (std::size_t i = 1; i < p.heights_main.size(); ++i)
        if (!(p.heights_main[i] > p.heights_main[i - 1]))
            throw std::invalid_argument("CampaignPlan: main heights must be strictly increasing");
    for (const auto& r : p.routes) validate(r);
}

namespace detail {

inline void azimuth_unit(double az_deg, double& ux, double& uy) {
    ux = std::sin(az_deg * kDegToRad);
    uy = std::cos(az_deg * kDegToRad);
}

// Liang-Barsky style overlap test: true when the segment passes through
// the interior of the rectangle (grazing an edge does not count).
inline bool segment_crosses_rect(double ax, double ay, double bx, double by, const Rect& rect) {
    const double dx = bx - ax, dy = by - ay;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&t0, &t1](double denom, double num) {
        if (denom == 0.0) return num <= 0.0; // parallel: inside the slab?
        const double t = num / denom;
        if (denom > 0.0) {
            if (t < t1) t1 = t;
        } else {
            if (t > t0) t0 = t;
        }
        return t0 < t1;
    };
    if (!clip(-dx, ax - rect.min_x)) return false;
    if (!clip(dx, rect.max_x - ax)) return false;
    if (!clip(-dy, ay - rect.min_y)) return false;
    if (!clip(dy, rect.max_y - ay)) return false;
    return t1 - t0 > 1e-9;
}

// Exit point of the ray origin + t*dir (t > 0) from a rectangle that
// contains the origin.
inline void ray_exit_from_rect(const Rect& rect, double ox, double oy, double ux, double uy,
                               double& ex, double& ey) {
    double t = std::numeric_limits<double>::infinity();
    if (ux > 0.0) t = std::min(t, (rect.max_x - ox) / ux);
    if (ux < 0.0) t = std::min(t, (rect.min_x - ox) / ux);
    if (uy > 0.0) t = std::min(t, (rect.max_y - oy) / uy);
    if (uy < 0.0) t = std::min(t, (rect.min_y - oy) / uy);
    if (!std::isfinite(t)) throw std::invalid_argument("ray_exit_from_rect: zero direction");
    ex = ox + t * ux;
    ey = oy + t * uy;
}

// Straight two-waypoint route through (cx, cy), perpendicular to the
// given azimuth, at constant altitude.
inline Route perpendicular_route(double cx, double cy, double az_deg, double length, double height,
                                 RouteLabel label) {
    double ux, uy;
    azimuth_unit(az_deg, ux, uy);
    const double px = uy, py = -ux; // rotate -90 degrees
    Route r;
    r.id = 1;
    r.label = label;
    r.leg_altitude = height;
    r.waypoints = {{cx - 0.5 * length * px, cy - 0.5 * length * py, height},
                   {cx + 0.5 * length * px, cy + 0.5 * length * py, height}};
    return r;
}

inline std::vector<Route> plan_lobe_routes(const std::optional<BuildingModel>& building,
                                           const GeoPoint* bs, double az_deg,
                                           const std::vector<double>& heights, double standoff,
                                           double length, RouteLabel label) {
    if (heights.empty()) throw std::invalid_argument("plan: heights must be nonempty");
    if (standoff <= 0.0) throw std::invalid_argument("plan: standoff must be > 0");
    if (length <= 0.0) throw std::invalid_argument("plan: route length must be > 0");

    double ux, uy, cx, cy;
    azimuth_unit(az_deg, ux, uy);
    if (building) {
        // Boresight ray leaves from the footprint center; the route sits
        // standoff meters beyond the wall it crosses.
        double wx, wy;
        ray_exit_from_rect(building->footprint, building->footprint.center_x(),
                           building->footprint.center_y(), ux, uy, wx, wy);
        cx = wx + standoff * ux;
        cy = wy + standoff * uy;
    } else {
        if (bs == nullptr) throw std::invalid_argument("plan: need a building or a BS position");
        cx = bs->x + standoff * ux;
        cy = bs->y + standoff * uy;
    }

    std::vector<Route> routes;
    int id = 1;
    for (double h : heights) {
        Route r = perpendicular_route(cx, cy, az_deg, length, h, label);
        r.id = id++;
        if (building && segment_crosses_rect(r.waypoints.front().x, r.waypoints.front().y,
                                             r.waypoints.back().x, r.waypoints.back().y,
                                             building->footprint))
            throw std::invalid_argument("plan: route intersects the building footprint");
        validate(r);
        routes.push_back(std::move(r));
    }
    return routes;
}

} // namespace detail

// One straight constant-altitude route per height, orthogonal to the
// antenna boresight, centered on the boresight ray at the given standoff
// from the wall. All heights share the same 2D track.
inline std::vector<Route> plan_main_lobe(const BuildingModel& building,
                                         const AntennaPattern& antenna,
                                         const std::vector<double>& heights, double standoff,
                                         double length) {
    return detail::plan_lobe_routes(building, nullptr, antenna.boresight_azimuth_deg, heights,
                                    standoff, length, RouteLabel::main_lobe);
}

// Open-field variant: no wall to stand off from, so the standoff is
// measured from the BS itself.
inline std::vector<Route> plan_main_lobe(const GeoPoint& bs, const AntennaPattern& antenna,
                                         const std::vector<double>& heights, double standoff,
                                         double length) {
    return detail::plan_lobe_routes(std::nullopt, &bs, antenna.boresight_azimuth_deg, heights,
                                    standoff, length, RouteLabel::main_lobe);
}

// Side lobe sweep: the main lobe construction rotated 90 degrees
// clockwise (for an east-facing antenna this lands on the south side).
inline std::vector<Route> plan_side_lobe(const BuildingModel& building,
                                         const AntennaPattern& antenna, double height,
                                         double standoff, double length) {
    return detail::plan_lobe_routes(building, nullptr, antenna.boresight_azimuth_deg + 90.0,
                                    {height}, standoff, length, RouteLabel::side_lobe);
}

inline std::vector<Route> plan_side_lobe(const GeoPoint& bs, const AntennaPattern& antenna,
                                         double height, double standoff, double length) {
    return detail::plan_lobe_routes(std::nullopt, &bs, antenna.boresight_azimuth_deg + 90.0,
                                    {height}, standoff, length, RouteLabel::side_lobe);
}

// Clip a route to the largest prefix that avoids the masked arclength
// intervals (terrain rising into the flight level, for example).
inline Route truncate_for_terrain(const Route& r, const std::vector<Interval>& mask) {
    validate(r);
    const double total = polyline_length_2d(r.waypoints);
    double cut = total;
    for (const auto& iv : mask) {
        if (!iv.valid()) throw std::invalid_argument("truncate_for_terrain: bad mask interval");
        if (iv.lo < -1e-9 || iv.hi > total + 1e-9)
            throw std::invalid_argument("truncate_for_terrain: mask outside route arclength");
        if (iv.hi - iv.lo <= 0.0) continue;
        cut = std::min(cut, iv.lo);
    }
    if (cut <= 1e-9) throw std::invalid_argument("truncate_for_terrain: route fully masked");
    if (cut >= total - 1e-9) return r;

    Route out = r;
    out.waypoints.clear();
    double s = 0.0;
    out.waypoints.push_back(r.waypoints.front());
    for (std::size_t i = 1; i < r.waypoints.size(); ++i) {
        const double leg = distance_2d(r.waypoints[i - 1], r.waypoints[i]);
        if (s + leg >= cut) break;
        s += leg;
        out.waypoints.push_back(r.waypoints[i]);
    }
    out.waypoints.push_back(polyline_point_at(r.waypoints, cut));
    validate(out);
    return out;
}

// Parallel passes over the building, aligned with the boresight, spanning
// the footprint plus a margin on both ends.
inline std::vector<Route> plan_roof(const BuildingModel& building, const AntennaPattern& antenna,
                                    double height, int n_passes, double margin = 10.0) {
    validate(building);
    if (height <= building.roof_height_m)
        throw std::invalid_argument("plan_roof: height must be above the roof");
    if (n_passes < 1) throw std::invalid_argument("plan_roof: need at least one pass");

    double ux, uy;
    detail::azimuth_unit(antenna.boresight_azimuth_deg, ux, uy);
    const double px = uy, py = -ux;
    const double cx = building.footprint.center_x();
    const double cy = building.footprint.center_y();

    // Footprint extent along the boresight axis and across it.
    double smin = 0.0, smax = 0.0, pmin = 0.0, pmax = 0.0;
    bool first = true;
    const double xs[2] = {building.footprint.min_x, building.footprint.max_x};
    const double ys[2] = {building.footprint.min_y, building.footprint.max_y};
    for (double x : xs)
        for (double y : ys) {
            const double s = (x - cx) * ux + (y - cy) * uy;
            const double p = (x - cx) * px + (y - cy) * py;
            if (first) {
                smin = smax = s;
                pmin = pmax = p;
                first = false;
            } else {
                smin = std::min(smin, s);
                smax = std::max(smax, s);
                pmin = std::min(pmin, p);
                pmax = std::max(pmax, p);
            }
        }

    std::vector<Route> routes;
    for (int i = 0; i < n_passes; ++i) {
        const double off = pmin + (i + 1) * (pmax - pmin) / (n_passes + 1);
        Route r;
        r.id = i + 1;
        r.label = RouteLabel::back_lobe;
        r.leg_altitude = height;
        r.waypoints = {{cx + off * px + (smin - margin) * ux, cy + off * py + (smin - margin) * uy,
                        height},
                       {cx + off * px + (smax + margin) * ux, cy + off * py + (smax + margin) * uy,
                        height}};
        validate(r);
        routes.push_back(std::move(r));
    }
    return routes;
}

// Campaign assembly parameters; geometry defaults are scenario data, not
// calibrated values.
struct PlanParams {
    std::vector<double> heights_main{2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    double height_side = 5.0;
    double height_roof = 18.0;
    int repeats = 1;
    double standoff_m = 25.0;
    double length_m = 120.0;
    double side_standoff_m = 15.0;
    double side_length_m = 80.0;
    int roof_passes = 3;
    double roof_margin_m = 10.0;
    std::vector<Interval> terrain_mask; // applied to the lowest main height
};

// Builds the whole campaign: main lobe sweep per height (lowest one
// truncated when a terrain mask is given), one side lobe route, and the
// over-roof passes. Route ids are assigned sequentially in that order.
inline CampaignPlan build_campaign(const std::optional<BuildingModel>& building,
                                   const GeoPoint& bs, const AntennaPattern& antenna,
                                   const PlanParams& params) {
    CampaignPlan plan;
    plan.heights_main = params.heights_main;
    plan.height_side = params.height_side;
    plan.height_roof = params.height_roof;
    plan.repeats = params.repeats;

    int next_id = 1;
    auto add = [&plan, &next_id](Route r) {
        r.id = next_id++;
        plan.routes.push_back(std::move(r));
    };

    std::vector<Route> mains =
        building ? plan_main_lobe(*building, antenna, params.heights_main, params.standoff_m,
                                  params.length_m)
                 : plan_main_lobe(bs, antenna, params.heights_main, params.standoff_m,
                                  params.length_m);
    for (std::size_t i = 0; i < mains.size(); ++i) {
        if (i == 0 && !params.terrain_mask.empty())
            add(truncate_for_terrain(mains[i], params.terrain_mask));
        else
            add(mains[i]);
    }

    if (params.side_length_m > 0.0) {
        std::vector<Route> side =
            building ? plan_side_lobe(*building, antenna, params.height_side,
                                      params.side_standoff_m, params.side_length_m)
                     : plan_side_lobe(bs, antenna, params.height_side, params.side_standoff_m,
                                      params.side_length_m);
        add(side.front());
    }

    if (params.roof_passes > 0) {
        if (!building)
            throw std::invalid_argument("build_campaign: roof passes require a building");
        for (auto& r : plan_roof(*building, antenna, params.height_roof, params.roof_passes,
                                 params.roof_margin_m))
            add(std::move(r));
    }

    validate(plan);
    return plan;
}

} // namespace npnkit
