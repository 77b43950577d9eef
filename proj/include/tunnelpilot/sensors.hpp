/**
 * @file sensors.hpp
 * @brief Sensor synthesis against the tunnel world: 3D LiDAR raycasting,
 *        depth-camera rendering, the downward single-beam rangefinder, and
 *        synthetic artifact detections with configurable corruption.
 */

#pragma once

#include <random>

#include "tunnelpilot/apf.hpp"
#include "tunnelpilot/depth_image.hpp"
#include "tunnelpilot/dynamics.hpp"
#include "tunnelpilot/object_localizer.hpp"
#include "tunnelpilot/world.hpp"

namespace tunnelpilot {

struct LidarConfig {
    int rings{16};
    double vertical_fov_deg{30.0};  // total span, symmetric about horizontal
    int azimuth_steps{120};         // per ring, full 360 deg
    double max_range{100.0};
    double min_range{0.3};          // self-return rejection at ingestion
    double rate_hz{10.0};
    double noise_sigma{0.02};
    double dust_rate{2.0};          // mean speckle points per scan
    double dust_near{0.3};
    double dust_far{1.2};
};

struct DepthCamConfig {
    int width{80};
    int height{60};
    double hfov_deg{86.0};
    double vfov_deg{57.0};
    double max_range{6.0};
    double rate_hz{30.0};
    double noise_sigma{0.03};
    Vec3 mount_offset{0.1, 0.0, 0.0};  // camera origin in body frame
};

struct BeamConfig {
    double max_range{30.0};
    double rate_hz{100.0};
    double noise_sigma{0.01};
};

struct DetectionModelConfig {
    double p_detect{0.9};          // per-frame detection probability in range
    double fade_start{5.5};        // m, detection probability fades to 0 at max range
    double max_range{6.0};
    double min_range{0.3};
    double pixel_jitter{1.0};      // bbox center jitter, px
    double confidence_min{0.55};
    double confidence_max{0.95};
    double fp_rate{0.05};          // mean false positives per frame
    double fp_inband_fraction{0.15};  // fraction of FPs with plausible widths
};

struct SensorRig {
    LidarConfig lidar;
    DepthCamConfig depth_cam;
    BeamConfig single_beam;
};

/// Camera intrinsics derived from the FOV and resolution.
void camera_intrinsics(const DepthCamConfig& cfg, double& fx, double& fy,
                       double& cx, double& cy);

/// One LiDAR sweep in the sensor (body-attitude) frame. surface_ids, when
/// given, receives the hit surface id per returned point (dust points get
/// id -1000).
PointCloud raycast_lidar(const TunnelWorld& world, const VehicleState& pose,
                         const LidarConfig& cfg, std::mt19937_64& rng,
                         std::vector<int>* surface_ids = nullptr);

/// Pinhole depth frame; values are ray ranges, misses encoded as max_range.
DepthImage render_depth(const TunnelWorld& world, const VehicleState& pose,
                        const DepthCamConfig& cfg, std::mt19937_64& rng);

/// Downward single-beam range along body -z; NaN when nothing within range.
double single_beam_range(const TunnelWorld& world, const VehicleState& pose,
                         const BeamConfig& cfg, std::mt19937_64& rng);

/// Synthetic detector output for the current camera frame: true detections of
/// visible artifacts with jitter and per-frame misses, plus injected false
/// positives (out-of-band widths mostly, occasionally in-band).
std::vector<Detection> synth_detections(const TunnelWorld& world, const VehicleState& pose,
                                        const DepthCamConfig& cam, const DetectionModelConfig& cfg,
                                        const DepthImage& aligned_depth, double now,
                                        std::mt19937_64& rng);

}  // namespace tunnelpilot
