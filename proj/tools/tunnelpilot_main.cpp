/**
 * @file tunnelpilot_main.cpp
 * @brief Mission runner CLI: seeded single runs, seed-range batches, preset
 *        listing and trace replay verification.
 */

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tunnelpilot/runner.hpp"

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_stop(int) {
    g_stop_requested = 1;
}

int verbosity() {
    const char* env = std::getenv("TUNNELPILOT_VERBOSE");
    return env != nullptr ? std::atoi(env) : 1;
}

void print_report(const tunnelpilot::MissionReport& r) {
    if (verbosity() < 1) {
        return;
    }
    std::cout << "outcome=" << tunnelpilot::outcome_name(r.outcome)
              << " preset=" << r.world_preset << " seed=" << r.seed
              << " sim=" << r.sim_duration << "s wall=" << r.wall_time << "s\n"
              << "  distance=" << r.distance_traveled
              << "m explore_speed=" << r.mean_explore_speed
              << "m/s max_speed=" << r.max_speed
              << "m/s min_clearance=" << r.min_clearance_flight << "m\n"
              << "  progress=" << r.max_progress << "m return_error=" << r.return_error
              << "m artifacts=" << r.artifacts_localized << "/" << r.artifacts_total
              << " false_positives=" << r.false_positive_objects << "\n";
}

bool parse_seed_range(const std::string& text, std::vector<std::uint64_t>& seeds) {
    const auto sep = text.find("..");
    if (sep == std::string::npos) {
        seeds.push_back(std::stoull(text));
        return true;
    }
    const std::uint64_t a = std::stoull(text.substr(0, sep));
    const std::uint64_t b = std::stoull(text.substr(sep + 2));
    if (b < a) {
        return false;
    }
    for (std::uint64_t s = a; s <= b; ++s) {
        seeds.push_back(s);
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tunnelpilot;

    CLI::App app{"tunnelpilot - reactive tunnel mission simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seed_range, trace_path;
    std::uint64_t seed = 1;

    auto* run_cmd = app.add_subcommand("run", "run one mission");
    run_cmd->add_option("--config", config_path, "config JSON file");
    run_cmd->add_option("--seed", seed, "run seed");
    run_cmd->add_option("--out", out_dir, "output directory");

    auto* batch_cmd = app.add_subcommand("batch", "run a seed range");
    batch_cmd->add_option("--config", config_path, "config JSON file");
    batch_cmd->add_option("--seeds", seed_range, "seed range a..b or single seed")->required();
    batch_cmd->add_option("--out", out_dir, "output directory");

    auto* presets_cmd = app.add_subcommand("presets", "world presets");
    presets_cmd->add_subcommand("list", "list preset names");

    auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded trace's config and verify");
    replay_cmd->add_option("--trace", trace_path, "run output directory containing config.json and trace.csv")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);

    try {
        if (presets_cmd->parsed()) {
            for (const std::string& name : TunnelWorld::preset_names()) {
                std::cout << name << "\n";
            }
            return 0;
        }

        if (run_cmd->parsed()) {
            RunConfig cfg;
            if (!config_path.empty()) {
                cfg = load_config(config_path);
            }
            if (run_cmd->count("--seed") > 0) {
                cfg.seed = seed;
            }
            if (!out_dir.empty()) {
                cfg.out_dir = out_dir;
            }
            if (g_stop_requested) {
                cfg.stop_at_time = 0.0;
            }
            const MissionReport report = run_mission(cfg);
            print_report(report);
            return report.outcome == MissionOutcome::Success ? 0 : 1;
        }

        if (batch_cmd->parsed()) {
            RunConfig cfg;
            if (!config_path.empty()) {
                cfg = load_config(config_path);
            }
            if (!out_dir.empty()) {
                cfg.out_dir = out_dir;
            }
            std::vector<std::uint64_t> seeds;
            if (!parse_seed_range(seed_range, seeds)) {
                std::cerr << "invalid seed range: " << seed_range << "\n";
                return 2;
            }
            const BatchResult result = run_batch(cfg, seeds);
            std::cout << "seed,outcome,explore_speed,min_clearance,progress,artifacts\n";
            for (const MissionReport& r : result.reports) {
                std::cout << r.seed << ',' << outcome_name(r.outcome) << ','
                          << r.mean_explore_speed << ',' << r.min_clearance_flight << ','
                          << r.max_progress << ',' << r.artifacts_localized << '/'
                          << r.artifacts_total << "\n";
            }
            std::cout << result.successes << "/" << result.reports.size() << " SUCCESS\n";
            return result.all_success() ? 0 : 1;
        }

        if (replay_cmd->parsed()) {
            RunConfig cfg = load_config(trace_path + "/config.json");
            std::ifstream original(trace_path + "/trace.csv");
            if (!original) {
                std::cerr << "no trace.csv under " << trace_path << "\n";
                return 2;
            }
            std::stringstream original_bytes;
            original_bytes << original.rdbuf();

            cfg.out_dir = trace_path + "/replay";
            run_mission(cfg);
            std::ifstream replayed(cfg.out_dir + "/trace.csv");
            std::stringstream replayed_bytes;
            replayed_bytes << replayed.rdbuf();

            if (original_bytes.str() == replayed_bytes.str()) {
                std::cout << "replay identical\n";
                return 0;
            }
            std::cerr << "replay mismatch\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
