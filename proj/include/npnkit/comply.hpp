// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "npnkit/fuse.hpp"
#include "npnkit/types.hpp"

namespace npnkit {

// Field strength E (dBuV/m in the limit's bandwidth) to received power at
// an isotropic-reference antenna (dBm in ref_bw). The constant 77.2
// collects the free-space antenna factor at 1 MHz.
inline double field_strength_to_rx_power(double e_dbuv_per_m, double f_hz, double gain_dbi,
                                         double limit_bw_hz, double ref_bw_hz) {
    if (f_hz <= 0.0 || limit_bw_hz <= 0.0 || ref_bw_hz <= 0.0)
        throw std::invalid_argument("field_strength_to_rx_power: frequency and bandwidths must be > 0");
    const double f_mhz = f_hz / 1e6;
    return e_dbuv_per_m - 20.0 * std::log10(f_mhz) - 77.2 + gain_dbi -
           10.0 * std::log10(limit_bw_hz / ref_bw_hz);
}

// Receiver sensitivity degradation caused by interference at the given
// interference-to-noise ratio.
inline double inr_to_desensitization(double inr_db) {
    if (std::isnan(inr_db)) throw std::invalid_argument("inr_to_desensitization: NaN input");
    return 10.0 * std::log10(1.0 + std::pow(10.0, inr_db / 10.0));
}

// Express a published limit as received power (dBm) in the analysis
// reference bandwidth. I/N limits have no per-sample power equivalent.
inline RegulatoryLimit to_rx_power_limit(const RegulatoryLimit& limit, double carrier_hz,
                                         double ref_bw_hz) {
    validate(limit);
    if (limit.kind == LimitKind::inr)
        throw std::invalid_argument(
            "to_rx_power_limit: I/N limits need an interference-vs-noise decomposition and "
            "cannot be converted to a per-sample power level");
    RegulatoryLimit out = limit;
    out.kind = LimitKind::rx_power;
    out.unit = "dBm";
    out.meas_bandwidth_hz = ref_bw_hz;
    if (limit.kind == LimitKind::field_strength) {
        out.value = field_strength_to_rx_power(limit.value, carrier_hz, limit.antenna_gain_dbi,
                                               limit.meas_bandwidth_hz, ref_bw_hz);
    } else if (limit.meas_bandwidth_hz != ref_bw_hz) {
        out.value = limit.value - 10.0 * std::log10(limit.meas_bandwidth_hz / ref_bw_hz);
    }
    return out;
}

enum class Verdict { pass, fail, below_measurement_floor };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::below_measurement_floor: return "below_measurement_floor";
    }
    return "pass";
}

struct SampleVerdict {
    Verdict verdict = Verdict::pass;
    double margin_db = 0.0; // limit minus rsrp; positive = compliant
};

struct ComplianceReport {
    RegulatoryLimit limit;       // as evaluated (rx_power, dBm)
    double censor_threshold_dbm = -140.0;
    bool floor_limited = false;  // limit below what the scanner can see
    bool strict_height = false;
    std::vector<SampleVerdict> verdicts; // parallel to evaluated samples
    std::vector<std::size_t> evaluated_index; // indices into the input set
    std::size_t n_pass = 0;
    std::size_t n_fail = 0;
    std::size_t n_below_floor = 0;
    std::size_t n_height_skipped = 0;
    std::optional<std::size_t> worst_index; // into the input set
    double worst_margin_db = std::numeric_limits<double>::infinity();
};

// Compare every sample against an rx_power limit. When the limit sits
// below the scanner's censoring threshold the data cannot answer the
// question, so every verdict is below_measurement_floor and the report
// flags the measurement setup as insufficient.
inline ComplianceReport evaluate(const std::vector<FusedSample>& samples,
                                 const RegulatoryLimit& limit, double censor_threshold_dbm,
                                 bool strict_height = false) {
    validate(limit);
    if (limit.kind == LimitKind::inr)
        throw std::invalid_argument(
            "evaluate: I/N limits are planning thresholds, not sample-evaluable levels");
    if (limit.kind != LimitKind::rx_power)
        throw std::invalid_argument("evaluate: convert the limit to rx_power first");

    ComplianceReport report;
    report.limit = limit;
    report.censor_threshold_dbm = censor_threshold_dbm;
    report.strict_height = strict_height;
    report.floor_limited = limit.value < censor_threshold_dbm;

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (strict_height && std::abs(s.pos.z - limit.eval_height_m) > 1.0) {
            ++report.n_height_skipped;
            continue;
        }
        SampleVerdict v;
        v.margin_db = limit.value - s.rsrp_dbm;
        if (report.floor_limited) {
            v.verdict = Verdict::below_measurement_floor;
            ++report.n_below_floor;
        } else if (v.margin_db >= 0.0) {
            v.verdict = Verdict::pass;
            ++report.n_pass;
        } else {
            v.verdict = Verdict::fail;
            ++report.n_fail;
        }
        if (v.margin_db < report.worst_margin_db) {
            report.worst_margin_db = v.margin_db;
            report.worst_index = i;
        }
        report.evaluated_index.push_back(i);
        report.verdicts.push_back(v);
    }
    return report;
}

} // namespace npnkit
