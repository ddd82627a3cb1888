// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "npnkit/fuse.hpp"
#include "npnkit/geo.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

// RSRP heatmap over the (route arclength, altitude) plane. Empty cells
// hold NaN.
struct HeatmapGrid {
    double cell_m = 1.0;
    double u0 = 0.0; // lower edge of the first arclength bin
    double v0 = 0.0; // lower edge of the first altitude bin
    std::size_t nu = 0;
    std::size_t nv = 0;
    std::vector<double> values; // row-major [v][u], dBm, NaN = empty

    double u_center(std::size_t i) const { return u0 + (i + 0.5) * cell_m; }
    double v_center(std::size_t j) const { return v0 + (j + 0.5) * cell_m; }
    double at(std::size_t iu, std::size_t iv) const { return values[iv * nu + iu]; }
    bool empty_cell(std::size_t iu, std::size_t iv) const { return std::isnan(at(iu, iv)); }
};

// Inverse-distance-weighted interpolation, done in linear milliwatts so
// that cell values are physical power averages. Cells farther than
// `radius` from every sample stay empty.
inline HeatmapGrid heatmap(const std::vector<FusedSample>& samples, const Route& route,
                           double cell, double radius, double power = 2.0) {
    if (cell <= 0.0 || radius <= 0.0)
        throw std::invalid_argument("heatmap: cell and radius must be > 0");
    validate(route);

    HeatmapGrid grid;
    grid.cell_m = cell;
    const double total = polyline_length_2d(route.waypoints);
    grid.nu = static_cast<std::size_t>(std::max(1.0, std::ceil(total / cell)));

    struct Pt {
        double u, v, mw, dbm;
    };
    std::vector<Pt> pts;
    pts.reserve(samples.size());
    double v_min = route.leg_altitude, v_max = route.leg_altitude;
    for (const auto& s : samples) {
        const auto proj = project_to_polyline_2d(route.waypoints, s.pos.x, s.pos.y);
        pts.push_back({proj.arclength, s.pos.z, dbm_to_mw(s.rsrp_dbm), s.rsrp_dbm});
        v_min = std::min(v_min, s.pos.z);
        v_max = std::max(v_max, s.pos.z);
    }
    grid.v0 = std::floor(v_min / cell) * cell;
    grid.nv = static_cast<std::size_t>(
        std::max(1.0, std::ceil((v_max - grid.v0) / cell + 1e-9)));
    grid.values.assign(grid.nu * grid.nv, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t jv = 0; jv < grid.nv; ++jv) {
        const double vc = grid.v_center(jv);
        for (std::size_t iu = 0; iu < grid.nu; ++iu) {
            const double uc = grid.u_center(iu);
            double wsum = 0.0, acc = 0.0;
            double exact = std::numeric_limits<double>::quiet_NaN();
            for (const auto& p : pts) {
                const double d = std::hypot(p.u - uc, p.v - vc);
                if (d > radius) continue;
                if (d < 1e-9) {
                    exact = p.dbm; // IDW is exact at data points
                    break;
                }
                const double w = 1.0 / std::pow(d, power);
                wsum += w;
                acc += w * p.mw;
            }
            if (!std::isnan(exact))
                grid.values[jv * grid.nu + iu] = exact;
            else if (wsum > 0.0)
                grid.values[jv * grid.nu + iu] = mw_to_dbm(acc / wsum);
        }
    }
    return grid;
}

// Empirical CDF of one flight's RSRP values.
struct Ecdf {
    int route_id = 0;
    double altitude_m = 0.0;
    int flight_index = 0;
    std::vector<double> values; // sorted ascending

    double evaluate(double x) const {
        const auto it = std::upper_bound(values.begin(), values.end(), x);
        return static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
    }
    double min() const { return values.front(); }
    double max() const { return values.back(); }
};

inline Ecdf make_ecdf(std::vector<double> values, int route_id, double altitude_m,
                      int flight_index = 0) {
    if (values.empty()) throw std::invalid_argument("make_ecdf: empty group");
    std::sort(values.begin(), values.end());
    return Ecdf{route_id, altitude_m, flight_index, std::move(values)};
}

// One member of the truncated regression family.
struct RegressionFit {
    double d_max_m = 0.0;
    double intercept_dbm = 0.0; // fitted RSRP at 1 m
    double exponent_n = 0.0;
    double sigma_resid_db = 0.0;
    std::size_t n_points = 0;
    double censored_fraction = 0.0;
};

struct RegressionResult {
    std::vector<RegressionFit> family;
    std::size_t selected = 0; // index into family
    bool selection_within_threshold = false;
    double censor_threshold_dbm = -140.0;
    double residual_normality_a2 = 0.0; // Anderson-Darling A^2*, selected fit
    double data_d_min_m = 0.0;
    double data_d_max_m = 0.0;

    const RegressionFit& selected_fit() const { return family.at(selected); }
};

namespace detail {

struct OlsFit {
    double intercept;
    double slope;
    double sigma;
    std::size_t n;
};

// Ordinary least squares of rsrp on 10*log10(d). The slope is the
// negated path-loss exponent.
inline OlsFit ols_log_distance(const std::vector<double>& d, const std::vector<double>& y) {
    const std::size_t n = d.size();
    if (n < 10) throw std::invalid_argument("regression: fewer than 10 points");
    double sx = 0.0, sy = 0.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 10.0 * std::log10(d[i]);
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx < 1e-12) throw std::invalid_argument("regression: degenerate subset (no distance spread)");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        sse += r * r;
    }
    const double sigma = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2)) : 0.0;
    return {intercept, slope, sigma, n};
}

// Anderson-Darling A^2* for standardized residuals against N(0,1), with
// the usual small-sample adjustment for estimated parameters.
inline double anderson_darling_a2star(std::vector<double> z) {
    const std::size_t n = z.size();
    if (n < 8) return 0.0;
    std::sort(z.begin(), z.end());
    double a2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = std::clamp(normal_cdf(z[i]), 1e-12, 1.0 - 1e-12);
        const double uj = std::clamp(normal_cdf(z[n - 1 - i]), 1e-12, 1.0 - 1e-12);
        a2 += (2.0 * (i + 1) - 1.0) * (std::log(ui) + std::log1p(-uj));
    }
    a2 = -static_cast<double>(n) - a2 / static_cast<double>(n);
    return a2 * (1.0 + 0.75 / n + 2.25 / (static_cast<double>(n) * n));
}

} // namespace detail

// Evenly spaced truncation bounds between the 30th-percentile distance
// and the maximum distance.
inline std::vector<double> default_truncation_bounds(const std::vector<FusedSample>& samples,
                                                     std::size_t count = 10) {
    if (samples.empty()) throw std::invalid_argument("default_truncation_bounds: no samples");
    std::vector<double> d;
    d.reserve(samples.size());
    for (const auto& s : samples) d.push_back(s.distance_to_bs);
    std::sort(d.begin(), d.end());
    const double lo = d[static_cast<std::size_t>(0.3 * (d.size() - 1))];
    const double hi = d.back();
    if (!(hi > lo) || count < 2) return {hi};
    std::vector<double> bounds;
    for (std::size_t i = 0; i < count; ++i)
        bounds.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return bounds;
}

// Fits the whole truncated family and selects the largest bound whose
// estimated censored fraction stays under 5%: truncation trades sample
// size against the bias from the sensitivity floor, whose pull grows
// with distance.
inline RegressionResult fit_truncated_family(const std::vector<FusedSample>& samples,
                                             const std::vector<double>& d_bounds,
                                             double censor_threshold_dbm = -140.0) {
    if (samples.empty()) throw std::invalid_argument("fit_truncated_family: no samples");
    for (const auto& s : samples)
        if (!(s.distance_to_bs > 0.0))
            throw std::invalid_argument("fit_truncated_family: nonpositive distance_to_bs");

    RegressionResult result;
    result.censor_threshold_dbm = censor_threshold_dbm;
    result.data_d_min_m = std::numeric_limits<double>::infinity();
    result.data_d_max_m = 0.0;
    for (const auto& s : samples) {
        result.data_d_min_m = std::min(result.data_d_min_m, s.distance_to_bs);
        result.data_d_max_m = std::max(result.data_d_max_m, s.distance_to_bs);
    }

    std::vector<double> bounds = d_bounds;
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<std::vector<double>> resid_by_fit;
    for (double bound : bounds) {
        std::vector<double> d, y;
        double subset_d_max = 0.0;
        for (const auto& s : samples) {
            if (s.distance_to_bs > bound) continue;
            d.push_back(s.distance_to_bs);
            y.push_back(s.rsrp_dbm);
            subset_d_max = std::max(subset_d_max, s.distance_to_bs);
        }
        if (d.size() < 10) continue; // too thin to report
        const auto ols = detail::ols_log_distance(d, y);

        RegressionFit fit;
        fit.d_max_m = bound;
        fit.intercept_dbm = ols.intercept;
        fit.exponent_n = -ols.slope;
        fit.sigma_resid_db = ols.sigma;
        fit.n_points = ols.n;
        // Gaussian mass of the fitted line that falls below the floor at
        // the far edge of the subset.
        const double mu_far = ols.intercept + ols.slope * 10.0 * std::log10(subset_d_max);
        if (ols.sigma > 0.0)
            fit.censored_fraction = normal_cdf((censor_threshold_dbm - mu_far) / ols.sigma);
        else
            fit.censored_fraction = mu_far < censor_threshold_dbm ? 1.0 : 0.0;
        result.family.push_back(fit);

        std::vector<double> z;
        if (ols.sigma > 0.0) {
            z.reserve(d.size());
            for (std::size_t i = 0; i < d.size(); ++i)
                z.push_back((y[i] - (ols.intercept + ols.slope * 10.0 * std::log10(d[i]))) /
                            ols.sigma);
        }
        resid_by_fit.push_back(std::move(z));
    }
    if (result.family.empty())
        throw std::invalid_argument("fit_truncated_family: no bound leaves >= 10 points");

    // Largest bound with acceptable censoring; if none qualifies, fall
    // back to the least-censored fit. The family is always reported.
    result.selection_within_threshold = false;
    double least_fraction = std::numeric_limits<double>::infinity();
    std::size_t least_idx = 0;
    for (std::size_t i = 0; i < result.family.size(); ++i) {
        if (result.family[i].censored_fraction <= 0.05) {
            result.selected = i;
            result.selection_within_threshold = true;
        }
        if (result.family[i].censored_fraction < least_fraction) {
            least_fraction = result.family[i].censored_fraction;
            least_idx = i;
        }
    }
    if (!result.selection_within_threshold) result.selected = least_idx;

    result.residual_normality_a2 =
        detail::anderson_darling_a2star(std::move(resid_by_fit[result.selected]));
    return result;
}

// Mean line and +/-3 sigma envelope of the selected fit over the data's
// distance range.
struct Band {
    std::vector<double> distance_m;
    std::vector<double> mean_dbm;
    std::vector<double> lower_dbm;
    std::vector<double> upper_dbm;
};

inline Band reconstruct_band(const RegressionResult& result, std::size_t n_points = 100) {
    if (result.family.empty()) throw std::invalid_argument("reconstruct_band: no selected model");
    const auto& fit = result.selected_fit();
    Band band;
    const double lo = std::log10(std::max(result.data_d_min_m, 1e-3));
    const double hi = std::log10(std::max(result.data_d_max_m, result.data_d_min_m + 1e-9));
    for (std::size_t i = 0; i < n_points; ++i) {
        const double ld = lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(n_points - 1);
        const double d = std::pow(10.0, ld);
        const double mu = fit.intercept_dbm - fit.exponent_n * 10.0 * ld;
        band.distance_m.push_back(d);
        band.mean_dbm.push_back(mu);
        band.lower_dbm.push_back(mu - 3.0 * fit.sigma_resid_db);
        band.upper_dbm.push_back(mu + 3.0 * fit.sigma_resid_db);
    }
    return band;
}

} // namespace npnkit
