// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "npnkit/analyze.hpp"
#include "npnkit/comply.hpp"
#include "npnkit/fuse.hpp"
#include "npnkit/io.hpp"
#include "npnkit/plan.hpp"
#include "npnkit/scenario.hpp"
#include "npnkit/simulate.hpp"
#include "npnkit/version.hpp"

namespace npnkit {

// Error carrying the pipeline stage it came from, for the CLI's
// machine-readable error output.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& msg)
        : std::runtime_error(msg), stage(std::move(stage_name)) {}
};

inline void log_line(const std::string& msg) {
    const char* v = std::getenv("NPNKIT_LOG");
    if (v == nullptr || *v == '\0' || std::string_view(v) == "0") return;
    std::fprintf(stderr, "[npnkit] %s\n", msg.c_str());
}

// Collects written files and their content hashes for the manifest.
class OutputWriter {
  public:
    explicit OutputWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& relpath, std::string_view content) {
        atomic_write_file(root_ / relpath, content);
        hashes_[relpath] = fnv1a64_hex(content);
        log_line("wrote " + (root_ / relpath).string());
    }

    const std::map<std::string, std::string>& hashes() const { return hashes_; }
    const std::filesystem::path& root() const { return root_; }

  private:
    std::filesystem::path root_;
    std::map<std::string, std::string> hashes_;
};

struct FlightFiles {
    int route_id = 0;
    int flight_index = 0;
    std::string scanner_rel;
    std::string telemetry_rel;
};

namespace detail {

inline std::string flight_stem(int route_id, int flight_index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "route%02d_flight%d", route_id, flight_index);
    return buf;
}

inline const Route& route_by_id(const CampaignPlan& plan, int id) {
    for (const auto& r : plan.routes)
        if (r.id == id) return r;
    throw std::runtime_error("unknown route id " + std::to_string(id));
}

} // namespace detail

// ---- plan ------------------------------------------------------------------

inline CampaignPlan cmd_plan(const Scenario& scn, OutputWriter& out,
                             const std::string& relpath = "plan.json") {
    try {
        CampaignPlan plan = build_campaign(scn.emission.building, scn.emission.bs_pos,
                                           scn.emission.antenna, scn.plan);
        out.write(relpath, plan_to_json(plan).dump(2) + "\n");
        return plan;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("plan", e.what());
    }
}

// ---- simulate ---------------------------------------------------------------

inline std::vector<FlightFiles> cmd_simulate(const Scenario& scn, const CampaignPlan& plan,
                                             OutputWriter& out, const std::string& subdir = "") {
    try {
        std::vector<FlightFiles> flights;
        for (const auto& route : plan.routes) {
            for (int k = 0; k < plan.repeats; ++k) {
                const FlightLogs logs = fly(scn.emission, scn.scanner, route, scn.speed_mps,
                                            static_cast<std::uint32_t>(k));
                FlightFiles ff;
                ff.route_id = route.id;
                ff.flight_index = k;
                const std::string stem =
                    (subdir.empty() ? "" : subdir + "/") + detail::flight_stem(route.id, k);
                ff.scanner_rel = stem + "_scanner.csv";
                ff.telemetry_rel = stem + "_telemetry.csv";
                out.write(ff.scanner_rel, write_scanner_csv(logs.scanner, scn.origin));
                out.write(ff.telemetry_rel, write_telemetry_csv(logs.telemetry, scn.origin));
                flights.push_back(std::move(ff));
            }
        }
        return flights;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("simulate", e.what());
    }
}

// ---- fuse -------------------------------------------------------------------

inline std::vector<FusedSample> cmd_fuse(const Scenario& scn, const std::string& scanner_csv,
                                         const std::string& telemetry_csv,
                                         const CampaignPlan& plan, OutputWriter& out,
                                         const std::string& relpath) {
    try {
        const auto scan = parse_scanner_csv(scanner_csv, scn.origin);
        const auto tel = parse_telemetry_csv(telemetry_csv, scn.origin);
        const double delta = estimate_clock_offset(scan, tel, scn.fusion);
        log_line("estimated clock offset " + detail::fmt(delta, 2) + " s for " + relpath);
        auto fused = fuse(scan, tel, plan.routes, scn.emission.bs_pos, scn.fusion, delta);
        out.write(relpath, write_fused_csv(fused));
        return fused;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("fuse", e.what());
    }
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeInput {
    std::vector<FusedSample> samples;
    std::string name; // one flight per input
};

enum class OutputFormat { all, csv, json, geojson };

inline OutputFormat output_format_from_string(const std::string& s) {
    if (s == "all" || s.empty()) return OutputFormat::all;
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    if (s == "geojson") return OutputFormat::geojson;
    throw std::runtime_error("unknown output format: " + s);
}

inline void cmd_analyze(const Scenario& scn, const CampaignPlan& plan,
                        const std::vector<AnalyzeInput>& inputs, OutputWriter& out,
                        OutputFormat format = OutputFormat::all, const std::string& subdir = "") {
    try {
        const std::string prefix = subdir.empty() ? "" : subdir + "/";

        // Per-flight CDF groups, keyed by route; the flight index counts
        // repeats of the same route across the inputs in order.
        std::vector<Ecdf> cdfs;
        std::map<int, int> flight_counter;
        for (const auto& in : inputs) {
            std::map<int, std::vector<double>> by_route;
            for (const auto& s : in.samples) by_route[s.route_id].push_back(s.rsrp_dbm);
            for (auto& [route_id, values] : by_route) {
                const Route& r = detail::route_by_id(plan, route_id);
                cdfs.push_back(make_ecdf(std::move(values), route_id, r.leg_altitude,
                                         flight_counter[route_id]++));
            }
        }

        // Pool samples by lobe for the heatmaps; main-lobe flights share a
        // 2D track, so the longest main route defines the arclength axis.
        std::vector<FusedSample> main_pool, all_pool;
        std::map<int, std::vector<FusedSample>> other_tracks; // per route id
        for (const auto& in : inputs)
            for (const auto& s : in.samples) {
                all_pool.push_back(s);
                const Route& r = detail::route_by_id(plan, s.route_id);
                if (r.label == RouteLabel::main_lobe)
                    main_pool.push_back(s);
                else
                    other_tracks[s.route_id].push_back(s);
            }

        const bool want_csv = format == OutputFormat::all || format == OutputFormat::csv;
        const bool want_geojson = format == OutputFormat::all || format == OutputFormat::geojson;

        auto emit_heatmap = [&](const std::vector<FusedSample>& samples, const Route& track,
                                const std::string& name) {
            if (samples.empty()) return;
            const HeatmapGrid grid = heatmap(samples, track, scn.analysis.heatmap_cell_m,
                                             scn.analysis.heatmap_radius_m,
                                             scn.analysis.idw_power);
            if (want_csv) out.write(prefix + name + ".csv", heatmap_to_csv(grid));
            if (want_geojson)
                out.write(prefix + name + ".geojson",
                          heatmap_to_geojson(grid, track, scn.origin).dump(2) + "\n");
        };

        if (!main_pool.empty()) {
            const Route* track = nullptr;
            for (const auto& r : plan.routes) {
                if (r.label != RouteLabel::main_lobe) continue;
                if (track == nullptr ||
                    polyline_length_2d(r.waypoints) > polyline_length_2d(track->waypoints))
                    track = &r;
            }
            emit_heatmap(main_pool, *track, "heatmap_main");
        }
        for (const auto& [route_id, samples] : other_tracks) {
            const Route& r = detail::route_by_id(plan, route_id);
            emit_heatmap(samples, r,
                         "heatmap_" + to_string(r.label) + "_route" + std::to_string(route_id));
        }

        out.write(prefix + "cdf.json", ecdf_to_json(cdfs).dump(2) + "\n");

        // The paper's regression uses the main-lobe test case; fall back
        // to everything when no main-lobe samples are present.
        const std::vector<FusedSample>& reg_pool = main_pool.empty() ? all_pool : main_pool;
        if (reg_pool.size() >= 10) {
            const auto bounds =
                default_truncation_bounds(reg_pool, scn.analysis.truncation_bounds);
            const auto result =
                fit_truncated_family(reg_pool, bounds, scn.scanner.sensitivity_dbm);
            out.write(prefix + "regression.json", regression_to_json(result).dump(2) + "\n");
        } else {
            log_line("analyze: fewer than 10 fused samples, regression skipped");
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("analyze", e.what());
    }
}

// ---- comply -----------------------------------------------------------------

inline ComplianceReport cmd_comply(const Scenario& scn, const std::vector<FusedSample>& samples,
                                   const std::filesystem::path& limit_path, OutputWriter& out,
                                   const std::string& relpath, bool strict_height = false) {
    try {
        json lj;
        try {
            lj = json::parse(read_file(limit_path));
        } catch (const json::parse_error& e) {
            throw std::runtime_error("limit file " + limit_path.string() + ": " + e.what());
        }
        const RegulatoryLimit published = limit_from_json(lj);
        if (published.kind == LimitKind::inr) {
            // Planning threshold, not a per-sample level: report what it
            // means for a receiver instead of pretending to evaluate it.
            const json rj{{"limit_as_published", limit_to_json(published)},
                          {"evaluable", false},
                          {"reason",
                           "I/N limits constrain interference relative to receiver noise and "
                           "need an interference-vs-noise decomposition; scanner RSRP samples "
                           "cannot be checked against them directly"},
                          {"worst_case_desensitization_db",
                           inr_to_desensitization(published.value)}};
            out.write(relpath, rj.dump(2) + "\n");
            return ComplianceReport{};
        }
        const RegulatoryLimit rx = to_rx_power_limit(published, scn.emission.carrier_hz,
                                                     scn.analysis.ref_bandwidth_hz);
        ComplianceReport report =
            evaluate(samples, rx, scn.scanner.sensitivity_dbm, strict_height);
        json rj = compliance_to_json(report, samples);
        rj["limit_as_published"] = limit_to_json(published);
        out.write(relpath, rj.dump(2) + "\n");
        return report;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("comply", e.what());
    }
}

// ---- campaign ---------------------------------------------------------------

// Full pipeline: plan, fly every route (with repeats), fuse each flight,
// analyze, evaluate limits, and record a provenance manifest. Flights
// whose scanner log is too thin to fuse (heavy censoring) are recorded
// and skipped rather than failing the campaign.
inline void cmd_campaign(const Scenario& scn, const std::filesystem::path& out_dir,
                         const std::string& scenario_hash = "",
                         OutputFormat format = OutputFormat::all, bool strict_height = false) {
    OutputWriter out(out_dir);
    const CampaignPlan plan = cmd_plan(scn, out);
    const auto flights = cmd_simulate(scn, plan, out, "flights");

    std::vector<AnalyzeInput> fused_inputs;
    std::vector<FusedSample> all_fused;
    json skipped = json::array();
    for (const auto& ff : flights) {
        const std::string scanner_csv = read_file(out.root() / ff.scanner_rel);
        const std::string telemetry_csv = read_file(out.root() / ff.telemetry_rel);
        const std::string stem = detail::flight_stem(ff.route_id, ff.flight_index);
        try {
            auto fused = cmd_fuse(scn, scanner_csv, telemetry_csv, plan, out,
                                  "fused/" + stem + ".csv");
            all_fused.insert(all_fused.end(), fused.begin(), fused.end());
            fused_inputs.push_back({std::move(fused), stem});
        } catch (const StageError& e) {
            log_line("campaign: skipping flight " + stem + ": " + e.what());
            skipped.push_back({{"flight", stem}, {"reason", e.what()}});
        }
    }

    cmd_analyze(scn, plan, fused_inputs, out, format, "analysis");

    for (const auto& limit_path : scn.limit_files) {
        const std::string name = limit_path.stem().string();
        cmd_comply(scn, all_fused, limit_path, out, "compliance/report_" + name + ".json",
                   strict_height);
    }

    json manifest{{"tool", "npnkit"},
                  {"version", kVersion},
                  {"seed", scn.seed},
                  {"scenario_fnv1a64", scenario_hash},
                  {"skipped_flights", skipped},
                  {"outputs", out.hashes()}};
    out.write("manifest.json", manifest.dump(2) + "\n");
}

} // namespace npnkit
