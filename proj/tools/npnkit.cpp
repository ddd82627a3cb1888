// SPDX-License-Identifier: Apache-2.0
//
// npnkit: desk-scale pipeline for UAV-based outdoor-emission assessment
// of private 5G networks. Simulates scanner flights around an indoor BS,
// fuses the logs, and produces heatmaps, CDFs, path-loss fits, and
// regulatory compliance reports.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "npnkit/commands.hpp"
#include "npnkit/scenario.hpp"
#include "npnkit/version.hpp"

namespace fs = std::filesystem;
using npnkit::json;

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::string format = "all";
    bool strict_height = false;
};

npnkit::Scenario load(const CommonArgs& args, std::string& scenario_hash) {
    const std::string text = npnkit::read_file(args.scenario_path);
    scenario_hash = npnkit::fnv1a64_hex(text);
    npnkit::Scenario scn = npnkit::load_scenario(args.scenario_path);
    if (args.seed) {
        scn.seed = *args.seed;
        scn.emission = [&] {
            auto e = scn.emission;
            e.shadow_seed = *args.seed;
            return e;
        }();
    }
    return scn;
}

std::string fused_output_name(const fs::path& scan_path) {
    std::string stem = scan_path.stem().string();
    const std::string suffix = "_scanner";
    if (stem.size() > suffix.size() && stem.ends_with(suffix))
        stem.resize(stem.size() - suffix.size());
    return stem + "_fused.csv";
}

std::vector<npnkit::AnalyzeInput> read_fused_inputs(const std::vector<std::string>& paths) {
    std::vector<npnkit::AnalyzeInput> inputs;
    for (const auto& p : paths)
        inputs.push_back({npnkit::parse_fused_csv(npnkit::read_file(p)), fs::path(p).stem().string()});
    return inputs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV-based outdoor emission assessment toolkit for private 5G networks"};
    app.set_version_flag("--version", npnkit::kVersion);
    app.require_subcommand(1);

    CommonArgs args;
    std::string scan_path, telemetry_path, plan_path, limit_path;
    std::vector<std::string> fused_paths;

    auto add_common = [&args](CLI::App* cmd, bool with_format = false,
                              bool with_strict = false) {
        cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file")->required();
        cmd->add_option("--out", args.out, "Output directory");
        cmd->add_option("--seed", args.seed, "Override the scenario seed");
        if (with_format)
            cmd->add_option("--format", args.format, "Restrict outputs: csv|json|geojson|all");
        if (with_strict)
            cmd->add_flag("--strict-height", args.strict_height,
                          "Only evaluate samples within 1 m of the limit's eval height");
    };

    CLI::App* c_plan = app.add_subcommand("plan", "Generate the campaign waypoint routes");
    add_common(c_plan);

    CLI::App* c_sim = app.add_subcommand("simulate", "Fly the planned routes virtually");
    add_common(c_sim);
    c_sim->add_option("--plan", plan_path, "Use an existing plan JSON instead of re-planning");

    CLI::App* c_fuse = app.add_subcommand("fuse", "Fuse one scanner log with telemetry");
    add_common(c_fuse);
    c_fuse->add_option("--scan", scan_path, "Scanner CSV")->required();
    c_fuse->add_option("--telemetry", telemetry_path, "Telemetry CSV")->required();
    c_fuse->add_option("--plan", plan_path, "Plan JSON")->required();

    CLI::App* c_analyze = app.add_subcommand("analyze", "Heatmaps, CDFs, path-loss regression");
    add_common(c_analyze, true);
    c_analyze->add_option("--plan", plan_path, "Plan JSON")->required();
    c_analyze->add_option("fused", fused_paths, "Fused CSV files (one per flight)")->required();

    CLI::App* c_comply = app.add_subcommand("comply", "Evaluate samples against a limit");
    add_common(c_comply, false, true);
    c_comply->add_option("--limit", limit_path, "Limit JSON file")->required();
    c_comply->add_option("fused", fused_paths, "Fused CSV files")->required();

    CLI::App* c_campaign =
        app.add_subcommand("campaign", "Run simulate, fuse, analyze, comply end to end");
    add_common(c_campaign, true, true);

    CLI11_PARSE(app, argc, argv);

    std::string stage = "cli";
    try {
        std::string scenario_hash;
        npnkit::Scenario scn = load(args, scenario_hash);
        npnkit::OutputWriter out{fs::path(args.out)};

        if (c_plan->parsed()) {
            stage = "plan";
            npnkit::cmd_plan(scn, out);
        } else if (c_sim->parsed()) {
            stage = "simulate";
            const npnkit::CampaignPlan plan =
                plan_path.empty()
                    ? npnkit::build_campaign(scn.emission.building, scn.emission.bs_pos,
                                             scn.emission.antenna, scn.plan)
                    : npnkit::plan_from_json(json::parse(npnkit::read_file(plan_path)));
            npnkit::cmd_simulate(scn, plan, out);
        } else if (c_fuse->parsed()) {
            stage = "fuse";
            const npnkit::CampaignPlan plan =
                npnkit::plan_from_json(json::parse(npnkit::read_file(plan_path)));
            npnkit::cmd_fuse(scn, npnkit::read_file(scan_path), npnkit::read_file(telemetry_path),
                             plan, out, fused_output_name(scan_path));
        } else if (c_analyze->parsed()) {
            stage = "analyze";
            const npnkit::CampaignPlan plan =
                npnkit::plan_from_json(json::parse(npnkit::read_file(plan_path)));
            npnkit::cmd_analyze(scn, plan, read_fused_inputs(fused_paths), out,
                                npnkit::output_format_from_string(args.format));
        } else if (c_comply->parsed()) {
            stage = "comply";
            std::vector<npnkit::FusedSample> samples;
            for (auto& in : read_fused_inputs(fused_paths))
                samples.insert(samples.end(), in.samples.begin(), in.samples.end());
            npnkit::cmd_comply(scn, samples, limit_path, out,
                               "report_" + fs::path(limit_path).stem().string() + ".json",
                               args.strict_height);
        } else if (c_campaign->parsed()) {
            stage = "campaign";
            npnkit::cmd_campaign(scn, fs::path(args.out), scenario_hash,
                                 npnkit::output_format_from_string(args.format),
                                 args.strict_height);
        }
    } catch (const npnkit::StageError& e) {
        const json err{{"stage", e.stage}, {"error", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        const json err{{"stage", stage}, {"error", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}
