/**
 * @file runner.hpp
 * @brief Closed-loop mission runner: wires plant, sensors, avoidance, control
 *        and the mission executive on a lockstep logical clock, scores the
 *        run, and emits trace/report/plot files.
 */

#pragma once

#include <vector>

#include "tunnelpilot/config.hpp"

namespace tunnelpilot {

enum class MissionOutcome { Success, Crash, Timeout, Stopped, Failed };

const char* outcome_name(MissionOutcome outcome);

struct ArtifactScore {
    int class_id{0};
    Vec3 truth{Vec3::Zero()};
    bool localized{false};
    double error{-1.0};  // m, distance to the matched report
};

struct MissionReport {
    MissionOutcome outcome{MissionOutcome::Failed};
    std::string world_preset;
    std::uint64_t seed{0};
    std::string profile;

    double sim_duration{0.0};
    double distance_traveled{0.0};
    double mean_explore_speed{0.0};
    double max_speed{0.0};
    double min_explore_speed_post_transient{0.0};
    double narrow_band_mean_speed{-1.0};   // only when the preset annotates a band
    double open_band_mean_speed{-1.0};
    double min_clearance_flight{1e9};      // during EXPLORE/RETURN
    double min_clearance_all{1e9};
    double max_progress{0.0};              // arc length reached on the main tunnel
    double return_error{-1.0};             // horizontal distance landing vs take-off
    double max_roll_ref_step{0.0};
    double max_pitch_ref_step{0.0};
    int degraded_solves{0};

    int artifacts_total{0};
    int artifacts_localized{0};
    int false_positive_objects{0};
    std::vector<ArtifactScore> artifact_scores;
    std::vector<LocalizedObject> reported_objects;

    int beam_scans_in_range{0};    // scans taken within 5 m of a "beam" obstacle
    int beam_scans_with_hit{0};    // of those, scans with at least one beam return

    double wall_time{0.0};  // not serialized; reports must replay bit-identically

    std::string out_dir;

    nlohmann::json to_json() const;  // deterministic (excludes wall_time)
};

MissionReport run_mission(const RunConfig& config);

struct BatchResult {
    std::vector<MissionReport> reports;
    int successes{0};

    bool all_success() const { return successes == static_cast<int>(reports.size()); }
};

/// Runs the config across a seed range; per-run outputs land in
/// <out_dir>/seed_<n>/ when an output directory is configured.
BatchResult run_batch(const RunConfig& base, const std::vector<std::uint64_t>& seeds);

}  // namespace tunnelpilot
