/**
 * @file config.hpp
 * @brief Run configuration: world preset plus every module parameter block.
 *        A run is reproducible from the config and seed alone.
 */

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tunnelpilot/apf.hpp"
#include "tunnelpilot/dphr.hpp"
#include "tunnelpilot/dynamics.hpp"
#include "tunnelpilot/mission.hpp"
#include "tunnelpilot/nmpc.hpp"
#include "tunnelpilot/object_localizer.hpp"
#include "tunnelpilot/sensors.hpp"

namespace tunnelpilot {

struct RunConfig {
    std::string world_preset{"curving"};
    std::uint64_t seed{1};
    std::string profile{"nominal"};   // "nominal" or "fast"
    double fast_weight_scale{12.0};   // q_p scale applied by the fast profile

    double t_reference{-1.0};         // <0: use the preset default
    double altitude_setpoint{-1.0};   // <0: use the preset default
    double max_sim_time{-1.0};        // <0: derived from t_reference
    double stop_at_time{-1.0};        // >=0: inject a STOP at this sim time

    double initial_yaw_jitter{0.1};      // rad, uniform +-, seeded
    double initial_lateral_jitter{0.25}; // m, uniform +-, seeded

    PlantParams plant;
    YawPdParams yaw_pd;
    NmpcConfig nmpc;
    NmpcWeights weights;
    InputBounds bounds;
    ApfParams apf;
    std::size_t apf_max_points{4000};
    DphrParams dphr;
    LocalizerParams localizer;
    MissionParams mission;
    SensorRig rig;
    DetectionModelConfig detection;

    std::string out_dir;
    bool write_trace{true};
    bool dphr_debug_dump{false};

    /// Weights with the profile applied (fast scales the adaptive range).
    NmpcWeights resolved_weights() const;
};

/// Parse a config file; missing keys keep their defaults.
/// Throws std::runtime_error on unreadable files or malformed JSON.
RunConfig load_config(const std::string& path);

/// Apply a JSON object on top of an existing config.
void apply_json(const nlohmann::json& j, RunConfig& cfg);

/// Fully resolved dump (every parameter, suitable for replay).
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace tunnelpilot
