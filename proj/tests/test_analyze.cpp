// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "npnkit/analyze.hpp"
#include "npnkit/rng.hpp"
#include "npnkit/simulate.hpp"

using namespace npnkit;

namespace {

Route straight_track(double length, double alt) {
    Route r;
    r.id = 1;
    r.leg_altitude = alt;
    r.waypoints = {{0.0, 0.0, alt}, {0.0, length, alt}};
    return r;
}

FusedSample at(double u, double v, double rsrp, int route_id = 1) {
    FusedSample f;
    f.pos = {0.0, u, v};
    f.rsrp_dbm = rsrp;
    f.route_id = route_id;
    f.distance_to_bs = std::max(1.0, u);
    return f;
}

// Synthetic log-distance data with i.i.d. Gaussian residuals: the
// generator is the oracle for every regression test.
std::vector<FusedSample> synthetic(double intercept, double exponent, double sigma,
                                   std::size_t n, std::uint64_t seed, double d_lo = 10.0,
                                   double d_hi = 500.0, double censor = -1e9) {
    SplitMix64 rng(seed);
    std::vector<FusedSample> out;
    while (out.size() < n) {
        const double d = d_lo + (d_hi - d_lo) * rng.uniform01();
        const double y = intercept - 10.0 * exponent * std::log10(d) + sigma * rng.normal();
        if (y < censor) continue; // drop-censoring
        FusedSample f;
        f.distance_to_bs = d;
        f.rsrp_dbm = y;
        f.route_id = 1;
        out.push_back(f);
    }
    return out;
}

} // namespace

TEST_CASE("heatmap: a single sample lands exactly in its cell") {
    const Route track = straight_track(20.0, 5.0);
    const auto grid = heatmap({at(7.3, 5.0, -88.5)}, track, 1.0, 3.0);
    REQUIRE(grid.nu == 20);
    // A lone data point propagates exactly into every in-radius cell.
    std::size_t filled = 0;
    for (std::size_t i = 0; i < grid.nu; ++i)
        for (std::size_t j = 0; j < grid.nv; ++j)
            if (!grid.empty_cell(i, j)) {
                CHECK(grid.at(i, j) == Catch::Approx(-88.5).margin(1e-9));
                CHECK(std::hypot(grid.u_center(i) - 7.3, grid.v_center(j) - 5.0) <= 3.0);
                ++filled;
            }
    CHECK(filled > 0);

    // A cell center coinciding with the sample returns it exactly.
    const auto exact = heatmap({at(6.5, 5.5, -77.25)}, track, 1.0, 3.0);
    bool exact_found = false;
    for (std::size_t i = 0; i < exact.nu; ++i)
        for (std::size_t j = 0; j < exact.nv; ++j)
            if (!exact.empty_cell(i, j) && std::abs(exact.u_center(i) - 6.5) < 1e-9 &&
                std::abs(exact.v_center(j) - 5.5) < 1e-9) {
                CHECK(exact.at(i, j) == -77.25);
                exact_found = true;
            }
    CHECK(exact_found);
}

TEST_CASE("heatmap: two equal samples bracketing a cell give their common value") {
    const Route track = straight_track(20.0, 5.0);
    const auto grid = heatmap({at(9.0, 5.0, -95.0), at(10.0, 5.0, -95.0)}, track, 1.0, 3.0);
    for (std::size_t i = 0; i < grid.nu; ++i)
        for (std::size_t j = 0; j < grid.nv; ++j)
            if (!grid.empty_cell(i, j))
                CHECK(grid.at(i, j) == Catch::Approx(-95.0).margin(1e-9));
}

TEST_CASE("heatmap: values stay inside the contributing samples' range") {
    const Route track = straight_track(50.0, 8.0);
    SplitMix64 rng(17);
    std::vector<FusedSample> samples;
    double lo = 0.0, hi = -1e9;
    for (int i = 0; i < 200; ++i) {
        const double rsrp = -80.0 - 40.0 * rng.uniform01();
        samples.push_back(at(50.0 * rng.uniform01(), 8.0 + 4.0 * (rng.uniform01() - 0.5), rsrp));
        lo = std::min(lo, rsrp);
        hi = std::max(hi, rsrp);
    }
    const auto grid = heatmap(samples, track, 1.0, 4.0);
    for (std::size_t i = 0; i < grid.nu; ++i)
        for (std::size_t j = 0; j < grid.nv; ++j)
            if (!grid.empty_cell(i, j)) {
                CHECK(grid.at(i, j) >= lo - 1e-9);
                CHECK(grid.at(i, j) <= hi + 1e-9);
            }
}

TEST_CASE("heatmap: empty input gives an all-empty grid, far cells stay empty") {
    const Route track = straight_track(30.0, 5.0);
    const auto empty = heatmap({}, track, 1.0, 3.0);
    for (std::size_t i = 0; i < empty.nu; ++i)
        for (std::size_t j = 0; j < empty.nv; ++j) CHECK(empty.empty_cell(i, j));

    const auto one = heatmap({at(2.0, 5.0, -90.0)}, track, 1.0, 2.0);
    // Cells more than 2 m from the lone sample hold nothing.
    for (std::size_t i = 0; i < one.nu; ++i)
        for (std::size_t j = 0; j < one.nv; ++j)
            if (std::hypot(one.u_center(i) - 2.0, one.v_center(j) - 5.0) > 2.0)
                CHECK(one.empty_cell(i, j));
    CHECK_THROWS_AS(heatmap({}, track, 0.0, 3.0), std::invalid_argument);
}

TEST_CASE("heatmap: window stripe shows up at the right arclength") {
    // East-facing BS in a small hut; one window span on the east wall.
    EmissionScenario scn;
    scn.bs_pos = {0.0, 0.0, 2.0};
    scn.antenna = {90.0, 10.0, 10.0, 10.0, 60.0, 90.0}; // flat gain
    BuildingModel b;
    b.footprint = {-4.0, -4.0, 4.0, 4.0};
    b.roof_height_m = 5.0;
    b.wall_loss_db = 20.0;
    b.window_loss_db = 5.0;
    b.east_window_spans = {{-1.0, 1.0}};
    scn.building = b;
    scn.pathloss = {60.0, 1.2, 0.0, -140.0};
    scn.shadow_seed = 1;

    ScannerProfile prof;
    prof.sample_rate_hz = 20.0;
    prof.gps_alt_noise_sigma_m = 0.0;
    prof.gps_horiz_noise_sigma_m = 0.0;
    prof.sensitivity_dbm = -1e9;
    Route r;
    r.id = 1;
    r.leg_altitude = 3.0;
    r.waypoints = {{20.0, -20.0, 3.0}, {20.0, 20.0, 3.0}};
    const FlightLogs logs = fly(scn, prof, r, 2.0);

    std::vector<FusedSample> fused;
    for (const auto& s : logs.scanner) {
        FusedSample f;
        f.pos = s.pos;
        f.rsrp_dbm = s.rsrp_dbm;
        f.route_id = 1;
        f.distance_to_bs = distance_3d(s.pos, scn.bs_pos);
        fused.push_back(f);
    }
    const auto grid = heatmap(fused, r, 1.0, 2.0);

    // The window span [-1, 1] on the wall (x = 4) maps to route
    // y in [-5, 5], i.e. arclength 15..25. Compare the stripe center
    // against cells well inside the wall region.
    double stripe = 0.0, wall = 0.0;
    int n_stripe = 0, n_wall = 0;
    for (std::size_t i = 0; i < grid.nu; ++i) {
        const double y = grid.u_center(i) - 20.0;
        for (std::size_t j = 0; j < grid.nv; ++j) {
            if (grid.empty_cell(i, j)) continue;
            if (std::abs(y) < 3.0) {
                stripe += grid.at(i, j);
                ++n_stripe;
            } else if (std::abs(y) > 8.0 && std::abs(y) < 15.0) {
                wall += grid.at(i, j);
                ++n_wall;
            }
        }
    }
    REQUIRE(n_stripe > 0);
    REQUIRE(n_wall > 0);
    CHECK(stripe / n_stripe - wall / n_wall ==
          Catch::Approx(b.wall_loss_db - b.window_loss_db).margin(2.0));
}

TEST_CASE("ecdf basics") {
    const Ecdf single = make_ecdf({-100.0}, 1, 4.0);
    CHECK(single.evaluate(-100.0) == 1.0);
    CHECK(single.evaluate(-100.1) == 0.0);

    const Ecdf pair = make_ecdf({-100.0, -90.0}, 1, 4.0);
    CHECK(pair.evaluate(-95.0) == 0.5);
    CHECK(pair.evaluate(-90.0) == 1.0);
    CHECK_THROWS_AS(make_ecdf({}, 1, 4.0), std::invalid_argument);
}

TEST_CASE("ecdf is invariant under sample reordering") {
    SplitMix64 rng(23);
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(-130.0 + 40.0 * rng.uniform01());
    std::vector<double> shuffled = values;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next() % i]);
    const Ecdf a = make_ecdf(values, 1, 4.0);
    const Ecdf b = make_ecdf(shuffled, 1, 4.0);
    CHECK(a.values == b.values);
}

TEST_CASE("ecdf of a drop-censored flight never dips below the floor") {
    EmissionScenario scn;
    scn.bs_pos = {0.0, 0.0, 2.0};
    scn.antenna = {90.0, 0.0, 0.0, 0.0, 45.0, 120.0};
    scn.pathloss = {140.0, 1.2, 5.0, -140.0};
    scn.shadow_seed = 77;
    ScannerProfile prof;
    prof.sensitivity_dbm = -140.0;
    Route r;
    r.id = 1;
    r.leg_altitude = 10.0;
    r.waypoints = {{10.0, 0.0, 10.0}, {400.0, 0.0, 10.0}};
    const FlightLogs logs = fly(scn, prof, r, 5.0);
    REQUIRE_FALSE(logs.scanner.empty());

    std::vector<double> values;
    for (const auto& s : logs.scanner) values.push_back(s.rsrp_dbm);
    const Ecdf cdf = make_ecdf(values, 1, 10.0);
    CHECK(cdf.min() >= -140.0);
    CHECK(cdf.evaluate(cdf.max()) == 1.0);
}

TEST_CASE("regression: noiseless data is recovered exactly") {
    const auto samples = synthetic(-70.0, 1.2, 0.0, 200, 42);
    const auto result = fit_truncated_family(samples, {500.0}, -1e9);
    REQUIRE(result.family.size() == 1);
    CHECK(result.selected_fit().exponent_n == Catch::Approx(1.2).margin(1e-9));
    CHECK(result.selected_fit().intercept_dbm == Catch::Approx(-70.0).margin(1e-7));
    CHECK(result.selected_fit().sigma_resid_db == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("regression: 1e4 noisy points recover n and sigma") {
    // Monte Carlo against the generator oracle (n = 1.2, sigma = 5).
    double sum_n = 0.0, sum_sigma = 0.0;
    const int seeds = 20;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto samples = synthetic(-70.0, 1.2, 5.0, 10000, seed);
        const auto result = fit_truncated_family(samples, {500.0}, -1e9);
        sum_n += result.selected_fit().exponent_n;
        sum_sigma += result.selected_fit().sigma_resid_db;
    }
    CHECK(sum_n / seeds == Catch::Approx(1.2).margin(0.05));
    CHECK(sum_sigma / seeds == Catch::Approx(5.0).margin(0.3));
}

TEST_CASE("regression: residuals of every family member sum to zero") {
    const auto samples = synthetic(-75.0, 1.4, 4.0, 2000, 9);
    const auto bounds = default_truncation_bounds(samples);
    const auto result = fit_truncated_family(samples, bounds, -1e9);
    for (const auto& fit : result.family) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& s : samples) {
            if (s.distance_to_bs > fit.d_max_m) continue;
            sum += s.rsrp_dbm -
                   (fit.intercept_dbm - fit.exponent_n * 10.0 * std::log10(s.distance_to_bs));
            ++n;
        }
        CHECK(n == fit.n_points);
        CHECK(std::abs(sum) / std::max<std::size_t>(n, 1) < 1e-9);
    }
}

TEST_CASE("regression: uniform rsrp shift moves the intercept, not the exponent") {
    const auto samples = synthetic(-75.0, 1.3, 5.0, 3000, 31);
    std::vector<FusedSample> shifted = samples;
    for (auto& s : shifted) s.rsrp_dbm += 17.0;
    const auto a = fit_truncated_family(samples, {500.0}, -1e9);
    const auto b = fit_truncated_family(shifted, {500.0}, -1e9);
    CHECK(b.selected_fit().exponent_n == Catch::Approx(a.selected_fit().exponent_n).margin(1e-9));
    CHECK(b.selected_fit().intercept_dbm ==
          Catch::Approx(a.selected_fit().intercept_dbm + 17.0).margin(1e-7));
    CHECK(b.selected_fit().sigma_resid_db ==
          Catch::Approx(a.selected_fit().sigma_resid_db).margin(1e-9));
}

TEST_CASE("regression: with censoring disabled the selected model is the full fit") {
    const auto samples = synthetic(-70.0, 1.2, 5.0, 4000, 12);
    const auto bounds = default_truncation_bounds(samples);
    const auto result = fit_truncated_family(samples, bounds, -1e9);
    CHECK(result.selection_within_threshold);
    CHECK(result.selected == result.family.size() - 1);
    CHECK(result.selected_fit().n_points == samples.size());
}

TEST_CASE("regression: censoring biases the naive fit low, truncation recovers") {
    // Generator truth n = 1.2 with a floor at -140: the survivors at long
    // range are upper-tail draws, flattening the naive slope.
    int truncated_wins = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto samples =
            synthetic(-100.0, 1.2, 5.0, 8000, 100 + seed, 10.0, 2000.0, -140.0);
        std::vector<double> bounds;
        for (int k = 1; k <= 10; ++k) bounds.push_back(2000.0 * k / 10.0);
        const auto family = fit_truncated_family(samples, bounds, -140.0);
        const auto naive = fit_truncated_family(samples, {2000.0}, -140.0);
        const double sel_err = std::abs(family.selected_fit().exponent_n - 1.2);
        const double naive_err = std::abs(naive.selected_fit().exponent_n - 1.2);
        if (sel_err < naive_err) ++truncated_wins;
        CHECK(naive.selected_fit().exponent_n < 1.2); // biased toward flat
    }
    CHECK(truncated_wins >= 9);
}

TEST_CASE("regression: degenerate inputs are rejected") {
    std::vector<FusedSample> flat;
    for (int i = 0; i < 50; ++i) {
        FusedSample f;
        f.distance_to_bs = 100.0;
        f.rsrp_dbm = -90.0 - i * 0.01;
        flat.push_back(f);
    }
    CHECK_THROWS_AS(fit_truncated_family(flat, {200.0}, -140.0), std::invalid_argument);

    const auto few = synthetic(-70.0, 1.2, 1.0, 5, 3);
    CHECK_THROWS_AS(fit_truncated_family(few, {500.0}, -140.0), std::invalid_argument);

    std::vector<FusedSample> bad_distance = synthetic(-70.0, 1.2, 1.0, 20, 3);
    bad_distance[0].distance_to_bs = 0.0;
    CHECK_THROWS_AS(fit_truncated_family(bad_distance, {500.0}, -140.0), std::invalid_argument);
}

TEST_CASE("default truncation bounds run from the 30th percentile to the max") {
    const auto samples = synthetic(-70.0, 1.2, 2.0, 1000, 8, 10.0, 500.0);
    const auto bounds = default_truncation_bounds(samples, 10);
    REQUIRE(bounds.size() == 10);
    double d_max = 0.0;
    for (const auto& s : samples) d_max = std::max(d_max, s.distance_to_bs);
    CHECK(bounds.back() == Catch::Approx(d_max));
    CHECK(bounds.front() < bounds.back());
    CHECK(std::is_sorted(bounds.begin(), bounds.end()));
}

TEST_CASE("band: zero sigma collapses all three curves") {
    const auto samples = synthetic(-70.0, 1.2, 0.0, 100, 4);
    const auto result = fit_truncated_family(samples, {500.0}, -1e9);
    const Band band = reconstruct_band(result);
    for (std::size_t i = 0; i < band.distance_m.size(); ++i) {
        CHECK(band.lower_dbm[i] == Catch::Approx(band.mean_dbm[i]).margin(1e-6));
        CHECK(band.upper_dbm[i] == Catch::Approx(band.mean_dbm[i]).margin(1e-6));
    }
}

TEST_CASE("band: width is six sigma and covers about 99.7% of Gaussian residuals") {
    const auto samples = synthetic(-70.0, 1.2, 5.0, 20000, 6);
    const auto result = fit_truncated_family(samples, {500.0}, -1e9);
    const Band band = reconstruct_band(result);
    const double sigma = result.selected_fit().sigma_resid_db;
    for (std::size_t i = 0; i < band.distance_m.size(); ++i)
        CHECK(band.upper_dbm[i] - band.lower_dbm[i] == Catch::Approx(6.0 * sigma).margin(1e-9));

    const auto& fit = result.selected_fit();
    std::size_t inside = 0;
    for (const auto& s : samples) {
        const double mu =
            fit.intercept_dbm - fit.exponent_n * 10.0 * std::log10(s.distance_to_bs);
        if (std::abs(s.rsrp_dbm - mu) <= 3.0 * sigma) ++inside;
    }
    // Gaussian 3-sigma coverage is 99.73%, not the oft-quoted 99%.
    CHECK(static_cast<double>(inside) / samples.size() == Catch::Approx(0.997).margin(0.002));
}

TEST_CASE("residual normality statistic separates Gaussian from uniform residuals") {
    const auto gauss = synthetic(-70.0, 1.2, 5.0, 5000, 13);
    const auto g = fit_truncated_family(gauss, {500.0}, -1e9);
    CHECK(g.residual_normality_a2 < 1.5);

    SplitMix64 rng(14);
    std::vector<FusedSample> uniform;
    for (int i = 0; i < 5000; ++i) {
        const double d = 10.0 + 490.0 * rng.uniform01();
        FusedSample f;
        f.distance_to_bs = d;
        f.rsrp_dbm = -70.0 - 12.0 * std::log10(d) + 17.3 * (rng.uniform01() - 0.5);
        uniform.push_back(f);
    }
    const auto u = fit_truncated_family(uniform, {500.0}, -1e9);
    CHECK(u.residual_normality_a2 > 2.5);
}
