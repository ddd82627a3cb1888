// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "npnkit/plan.hpp"

using namespace npnkit;

namespace {

BuildingModel campus() {
    BuildingModel b;
    b.footprint = {-25.0, -12.0, 8.0, 12.0};
    b.roof_height_m = 7.0;
    b.wall_loss_db = 20.0;
    b.window_loss_db = 5.0;
    b.east_window_spans = {{-9.0, -6.0}, {2.0, 5.0}};
    b.roof_window = {-6.0, -3.0, 0.0, 3.0};
    return b;
}

AntennaPattern east_antenna() { return {90.0, 15.0, 5.0, 0.0, 45.0, 120.0}; }

} // namespace

TEST_CASE("main lobe: one route per height, shared 2D track") {
    const auto routes =
        plan_main_lobe(campus(), east_antenna(), {2, 4, 6, 8, 10, 12}, 25.0, 120.0);
    REQUIRE(routes.size() == 6);
    for (std::size_t i = 0; i < routes.size(); ++i) {
        CHECK_NOTHROW(validate(routes[i]));
        CHECK(routes[i].leg_altitude == Catch::Approx(2.0 + 2.0 * i));
        CHECK(routes[i].label == RouteLabel::main_lobe);
        // Identical start/end horizontal coordinates across heights.
        CHECK(routes[i].waypoints.front().x == Catch::Approx(routes[0].waypoints.front().x));
        CHECK(routes[i].waypoints.front().y == Catch::Approx(routes[0].waypoints.front().y));
        CHECK(routes[i].waypoints.back().x == Catch::Approx(routes[0].waypoints.back().x));
        CHECK(routes[i].waypoints.back().y == Catch::Approx(routes[0].waypoints.back().y));
    }
}

TEST_CASE("main lobe: single height") {
    const auto routes = plan_main_lobe(campus(), east_antenna(), {5.0}, 25.0, 120.0);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].leg_altitude == 5.0);
}

TEST_CASE("east boresight gives a north-south route at the right standoff") {
    const auto routes = plan_main_lobe(campus(), east_antenna(), {6.0}, 25.0, 100.0);
    const auto& r = routes[0];
    // Direction due north-south: x constant along the route.
    CHECK(r.waypoints.front().x == Catch::Approx(r.waypoints.back().x));
    CHECK(std::abs(r.waypoints.front().y - r.waypoints.back().y) == Catch::Approx(100.0));
    // East wall sits at x = 8; standoff 25 puts the track at x = 33.
    CHECK(r.waypoints.front().x == Catch::Approx(33.0));
    // Centered on the boresight ray: midpoint y equals the BS row.
    CHECK(0.5 * (r.waypoints.front().y + r.waypoints.back().y) ==
          Catch::Approx(campus().footprint.center_y()).margin(1e-9));
}

TEST_CASE("open-field planning stands off from the BS") {
    const GeoPoint bs{10.0, 5.0, 2.0};
    const auto routes = plan_main_lobe(bs, east_antenna(), {4.0}, 30.0, 60.0);
    CHECK(routes[0].waypoints.front().x == Catch::Approx(40.0));
    CHECK(0.5 * (routes[0].waypoints.front().y + routes[0].waypoints.back().y) ==
          Catch::Approx(5.0).margin(1e-9));
}

TEST_CASE("oblique boresight with an elongated footprint can clip the building") {
    BuildingModel slab;
    slab.footprint = {-30.0, -2.0, 30.0, 2.0};
    slab.roof_height_m = 5.0;
    AntennaPattern a = east_antenna();
    a.boresight_azimuth_deg = 30.0; // mostly north, slightly east
    CHECK_THROWS_AS(plan_main_lobe(slab, a, {5.0}, 1.0, 60.0), std::invalid_argument);
    // A generous standoff clears the footprint.
    CHECK_NOTHROW(plan_main_lobe(slab, a, {5.0}, 40.0, 60.0));
}

TEST_CASE("side lobe: rotated 90 degrees, south side for an east-facing antenna") {
    const auto routes = plan_side_lobe(campus(), east_antenna(), 5.0, 15.0, 80.0);
    REQUIRE(routes.size() == 1);
    const auto& r = routes[0];
    CHECK(r.label == RouteLabel::side_lobe);
    CHECK(r.leg_altitude == 5.0);
    // South wall at y = -12, standoff 15: track at y = -27, running east-west.
    CHECK(r.waypoints.front().y == Catch::Approx(-27.0));
    CHECK(r.waypoints.back().y == Catch::Approx(-27.0));
    CHECK(std::abs(r.waypoints.front().x - r.waypoints.back().x) == Catch::Approx(80.0));
}

TEST_CASE("truncate_for_terrain: empty mask leaves the route alone") {
    const auto routes = plan_main_lobe(campus(), east_antenna(), {2.0}, 25.0, 120.0);
    const Route same = truncate_for_terrain(routes[0], {});
    CHECK(same.waypoints.size() == routes[0].waypoints.size());
    CHECK(polyline_length_2d(same.waypoints) ==
          Catch::Approx(polyline_length_2d(routes[0].waypoints)));
}

TEST_CASE("truncate_for_terrain: mask over the final 30% keeps 70% of arclength") {
    const auto routes = plan_main_lobe(campus(), east_antenna(), {2.0}, 25.0, 120.0);
    const Route cut = truncate_for_terrain(routes[0], {{84.0, 120.0}});
    CHECK(polyline_length_2d(cut.waypoints) == Catch::Approx(84.0));
    CHECK(cut.leg_altitude == 2.0);
    CHECK_NOTHROW(validate(cut));
}

TEST_CASE("truncate_for_terrain: mask in the middle keeps the prefix") {
    // Arclength-walk oracle on a multi-leg polyline.
    Route r;
    r.id = 1;
    r.leg_altitude = 4.0;
    r.waypoints = {{0, 0, 4}, {10, 0, 4}, {10, 10, 4}, {30, 10, 4}};
    const Route cut = truncate_for_terrain(r, {{15.0, 25.0}});
    CHECK(polyline_length_2d(cut.waypoints) == Catch::Approx(15.0));
    // The cut point sits 5 m up the second leg.
    CHECK(cut.waypoints.back().x == Catch::Approx(10.0));
    CHECK(cut.waypoints.back().y == Catch::Approx(5.0));
}

TEST_CASE("truncate_for_terrain: fully masked route is an error") {
    const auto routes = plan_main_lobe(campus(), east_antenna(), {2.0}, 25.0, 120.0);
    CHECK_THROWS_AS(truncate_for_terrain(routes[0], {{0.0, 120.0}}), std::invalid_argument);
    CHECK_THROWS_AS(truncate_for_terrain(routes[0], {{0.0, 10.0}, {50.0, 60.0}}),
                    std::invalid_argument);
    // Mask outside the arclength range violates the precondition.
    CHECK_THROWS_AS(truncate_for_terrain(routes[0], {{100.0, 200.0}}), std::invalid_argument);
}

TEST_CASE("roof passes: three parallel constant-altitude routes over the footprint") {
    const auto routes = plan_roof(campus(), east_antenna(), 18.0, 3, 10.0);
    REQUIRE(routes.size() == 3);
    for (const auto& r : routes) {
        CHECK(r.label == RouteLabel::back_lobe);
        for (const auto& w : r.waypoints) CHECK(w.z == 18.0);
        // Parallel to the (east) boresight: y constant along each pass.
        CHECK(r.waypoints.front().y == Catch::Approx(r.waypoints.back().y).margin(1e-9));
        // Footprint plus margin: from -35 to 18 in x.
        CHECK(r.waypoints.front().x == Catch::Approx(-35.0));
        CHECK(r.waypoints.back().x == Catch::Approx(18.0));
    }
    // Evenly spaced across the 24 m width: y = -6, 0, +6.
    std::vector<double> ys;
    for (const auto& r : routes) ys.push_back(r.waypoints.front().y);
    std::sort(ys.begin(), ys.end());
    CHECK(ys[0] == Catch::Approx(-6.0));
    CHECK(ys[1] == Catch::Approx(0.0).margin(1e-9));
    CHECK(ys[2] == Catch::Approx(6.0));
}

TEST_CASE("roof passes: single pass is centered") {
    const auto routes = plan_roof(campus(), east_antenna(), 18.0, 1);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].waypoints.front().y == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("roof pass below the roof is an error") {
    CHECK_THROWS_AS(plan_roof(campus(), east_antenna(), 6.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(plan_roof(campus(), east_antenna(), 18.0, 0), std::invalid_argument);
}

TEST_CASE("campaign assembly: sequential ids, truncated first height, labels") {
    PlanParams params;
    params.heights_main = {2, 4, 6, 8, 10, 12};
    params.standoff_m = 25.0;
    params.length_m = 120.0;
    params.side_standoff_m = 15.0;
    params.side_length_m = 80.0;
    params.roof_passes = 3;
    params.height_roof = 18.0;
    params.repeats = 2;
    params.terrain_mask = {{100.0, 120.0}};

    const CampaignPlan plan =
        build_campaign(campus(), {0.0, 0.0, 2.5}, east_antenna(), params);
    REQUIRE(plan.routes.size() == 10);
    for (std::size_t i = 0; i < plan.routes.size(); ++i)
        CHECK(plan.routes[i].id == static_cast<int>(i) + 1);

    // Lowest main-lobe flight is the shortened one.
    CHECK(polyline_length_2d(plan.routes[0].waypoints) == Catch::Approx(100.0));
    CHECK(polyline_length_2d(plan.routes[1].waypoints) == Catch::Approx(120.0));
    CHECK(plan.routes[6].label == RouteLabel::side_lobe);
    CHECK(plan.routes[7].label == RouteLabel::back_lobe);
    CHECK_NOTHROW(validate(plan));
}

TEST_CASE("campaign assembly: roof passes without a building are rejected") {
    PlanParams params;
    params.roof_passes = 3;
    CHECK_THROWS_AS(build_campaign(std::nullopt, {0, 0, 2}, east_antenna(), params),
                    std::invalid_argument);
    params.roof_passes = 0;
    CHECK_NOTHROW(build_campaign(std::nullopt, {0, 0, 2}, east_antenna(), params));
}

TEST_CASE("campaign plan validation") {
    CampaignPlan plan;
    plan.heights_main = {4.0, 2.0};
    CHECK_THROWS_AS(validate(plan), std::invalid_argument);
    plan.heights_main = {2.0, 4.0};
    plan.repeats = 0;
    CHECK_THROWS_AS(validate(plan), std::invalid_argument);
}
