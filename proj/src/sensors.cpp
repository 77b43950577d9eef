#include "tunnelpilot/sensors.hpp"

#include <cmath>

namespace tunnelpilot {

void camera_intrinsics(const DepthCamConfig& cfg, double& fx, double& fy,
                       double& cx, double& cy) {
    fx = (cfg.width / 2.0) / std::tan(cfg.hfov_deg * M_PI / 360.0);
    fy = (cfg.height / 2.0) / std::tan(cfg.vfov_deg * M_PI / 360.0);
    cx = cfg.width / 2.0;
    cy = cfg.height / 2.0;
}

PointCloud raycast_lidar(const TunnelWorld& world, const VehicleState& pose,
                         const LidarConfig& cfg, std::mt19937_64& rng,
                         std::vector<int>* surface_ids) {
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(cfg.rings) * cfg.azimuth_steps / 4);
    if (surface_ids != nullptr) {
        surface_ids->clear();
    }

    const Mat3 rot = rotation_body_to_world(pose.att);
    std::normal_distribution<double> range_noise(0.0, cfg.noise_sigma);

    const double elev_span = cfg.vertical_fov_deg * M_PI / 180.0;
    for (int ring = 0; ring < cfg.rings; ++ring) {
        const double elev = -elev_span / 2.0 +
                            elev_span * (cfg.rings > 1 ? ring / double(cfg.rings - 1) : 0.5);
        const double ce = std::cos(elev), se = std::sin(elev);
        for (int step = 0; step < cfg.azimuth_steps; ++step) {
            const double az = 2.0 * M_PI * step / cfg.azimuth_steps;
            const Vec3 dir_sensor{ce * std::cos(az), ce * std::sin(az), se};
            const auto hit = world.raycast(pose.p, rot * dir_sensor, cfg.max_range);
            if (!hit) {
                continue;
            }
            const double range = hit->range + (cfg.noise_sigma > 0.0 ? range_noise(rng) : 0.0);
            if (range <= 0.0 || range > cfg.max_range) {
                continue;
            }
            cloud.points.push_back(range * dir_sensor);
            if (surface_ids != nullptr) {
                surface_ids->push_back(hit->surface_id);
            }
        }
    }

    if (cfg.dust_rate > 0.0) {
        std::poisson_distribution<int> dust_count(cfg.dust_rate);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const int k = dust_count(rng);
        for (int i = 0; i < k; ++i) {
            const double z = 2.0 * unit(rng) - 1.0;
            const double phi = 2.0 * M_PI * unit(rng);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const Vec3 dir{r * std::cos(phi), r * std::sin(phi), z};
            const double range = cfg.dust_near + (cfg.dust_far - cfg.dust_near) * unit(rng);
            cloud.points.push_back(range * dir);
            if (surface_ids != nullptr) {
                surface_ids->push_back(-1000);
            }
        }
    }
    return cloud;
}

DepthImage render_depth(const TunnelWorld& world, const VehicleState& pose,
                        const DepthCamConfig& cfg, std::mt19937_64& rng) {
    DepthImage img;
    img.width = cfg.width;
    img.height = cfg.height;
    img.max_range = cfg.max_range;
    img.depth.resize(static_cast<std::size_t>(cfg.width) * cfg.height);
    camera_intrinsics(cfg, img.fx, img.fy, img.cx, img.cy);

    const Mat3 body_rot = rotation_body_to_world(pose.att);
    const FrameTransform mount = forward_camera_mount(cfg.mount_offset);
    const Mat3 cam_rot = body_rot * mount.rotation;
    const Vec3 origin = pose.p + body_rot * mount.translation;

    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);

    for (int v = 0; v < cfg.height; ++v) {
        double coherence = 0.0;  // scanline hint: neighbouring rays hit nearby
        for (int u = 0; u < cfg.width; ++u) {
            const Vec3 dir_cam{(u + 0.5 - img.cx) / img.fx, (v + 0.5 - img.cy) / img.fy, 1.0};
            const Vec3 dir = cam_rot * dir_cam.normalized();
            const auto hit = world.raycast(origin, dir, cfg.max_range, 96, coherence);
            double d = cfg.max_range;
            if (hit) {
                coherence = std::max(0.0, hit->range - 0.5);
                d = hit->range + (cfg.noise_sigma > 0.0 ? noise(rng) : 0.0);
                d = std::clamp(d, 0.0, cfg.max_range);
            } else {
                coherence = 0.0;
            }
            img.at(u, v) = static_cast<float>(d);
        }
    }
    return img;
}

double single_beam_range(const TunnelWorld& world, const VehicleState& pose,
                         const BeamConfig& cfg, std::mt19937_64& rng) {
    const Vec3 dir = rotation_body_to_world(pose.att) * Vec3{0.0, 0.0, -1.0};
    const auto hit = world.raycast(pose.p, dir, cfg.max_range);
    if (!hit) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double range = hit->range;
    if (cfg.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        range += noise(rng);
    }
    return std::max(range, 0.0);
}

std::vector<Detection> synth_detections(const TunnelWorld& world, const VehicleState& pose,
                                        const DepthCamConfig& cam, const DetectionModelConfig& cfg,
                                        const DepthImage& aligned_depth, double now,
                                        std::mt19937_64& rng) {
    std::vector<Detection> detections;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, cfg.pixel_jitter);

    const Mat3 body_rot = rotation_body_to_world(pose.att);
    const FrameTransform mount = forward_camera_mount(cam.mount_offset);
    const Mat3 cam_rot = body_rot * mount.rotation;
    const Vec3 origin = pose.p + body_rot * mount.translation;

    for (std::size_t i = 0; i < world.artifacts.size(); ++i) {
        const Artifact& art = world.artifacts[i];
        const Vec3 p_cam = cam_rot.transpose() * (art.position - origin);
        if (p_cam.z() < cfg.min_range) {
            continue;
        }
        const double range = p_cam.norm();
        if (range > cfg.max_range) {
            continue;
        }
        const double u = aligned_depth.cx + aligned_depth.fx * p_cam.x() / p_cam.z();
        const double v = aligned_depth.cy + aligned_depth.fy * p_cam.y() / p_cam.z();
        if (u < 1.0 || u > aligned_depth.width - 1.0 || v < 1.0 || v > aligned_depth.height - 1.0) {
            continue;
        }
        // Line-of-sight check: the first surface along the ray must be this artifact.
        const auto hit = world.raycast(origin, (art.position - origin) / range, range + 1.0);
        if (!hit || hit->surface_id != kSurfaceArtifactBase + static_cast<int>(i)) {
            continue;
        }
        double p = cfg.p_detect;
        if (range > cfg.fade_start) {
            p *= std::max(0.0, (cfg.max_range - range) / (cfg.max_range - cfg.fade_start));
        }
        if (unit(rng) > p) {
            continue;
        }

        Detection det;
        det.class_id = art.class_id;
        det.confidence = cfg.confidence_min + (cfg.confidence_max - cfg.confidence_min) * unit(rng);
        const double w_px = aligned_depth.fx * art.width / p_cam.z();
        const double h_px = aligned_depth.fy * art.height / p_cam.z();
        const double cu = u + (cfg.pixel_jitter > 0.0 ? jitter(rng) : 0.0);
        const double cv = v + (cfg.pixel_jitter > 0.0 ? jitter(rng) : 0.0);
        det.x_min = cu - w_px / 2.0;
        det.y_min = cv - h_px / 2.0;
        det.width_px = w_px;
        det.height_px = h_px;
        det.frame_time = now;
        detections.push_back(det);
    }

    // Injected false positives: mostly graffiti-like with implausible metric
    // widths, occasionally with in-band widths to exercise the buffer level.
    if (cfg.fp_rate > 0.0) {
        std::poisson_distribution<int> fp_count(cfg.fp_rate);
        const LocalizerParams default_priors;
        const int k = fp_count(rng);
        for (int i = 0; i < k; ++i) {
            const int class_id = 1 + static_cast<int>(unit(rng) * 6.0);
            const auto prior = default_priors.size_priors.find(std::min(class_id, 6));
            const double px = 2.0 + unit(rng) * (aligned_depth.width - 4.0);
            const double py = 2.0 + unit(rng) * (aligned_depth.height - 4.0);
            double d = aligned_depth.at(static_cast<int>(px), static_cast<int>(py));
            if (d <= 0.0 || d >= aligned_depth.max_range) {
                d = 3.0;
            }
            double metric_width;
            if (unit(rng) < cfg.fp_inband_fraction) {
                metric_width = prior->second.width_min +
                               unit(rng) * (prior->second.width_max - prior->second.width_min);
            } else {
                metric_width = prior->second.width_max * (2.0 + 2.0 * unit(rng));
            }
            Detection det;
            det.class_id = std::min(class_id, 6);
            det.confidence = 0.5 + 0.4 * unit(rng);
            const double w_px = metric_width * aligned_depth.fx / d;
            det.x_min = px - w_px / 2.0;
            det.y_min = py - w_px / 2.0;
            det.width_px = w_px;
            det.height_px = w_px;
            det.frame_time = now;
            detections.push_back(det);
        }
    }
    return detections;
}

}  // namespace tunnelpilot
