#include "tunnelpilot/object_localizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace tunnelpilot {

std::optional<LocalizedMeasurement> localize_detection(const Detection& det,
                                                       const DepthImage& depth,
                                                       const VehicleState& pose,
                                                       const FrameTransform& mount) {
    const int cx_px = static_cast<int>(std::round(det.x_min + det.width_px / 2.0));
    const int cy_px = static_cast<int>(std::round(det.y_min + det.height_px / 2.0));
    if (!depth.in_bounds(cx_px, cy_px)) {
        return std::nullopt;
    }

    // Median of the valid 3x3 window; a stray background pixel cannot bias it.
    std::vector<float> window;
    window.reserve(9);
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = cx_px + dx, y = cy_px + dy;
            if (!depth.in_bounds(x, y)) {
                continue;
            }
            const float d = depth.at(x, y);
            if (d > 0.0f && d < static_cast<float>(depth.max_range) - 1e-6f) {
                window.push_back(d);
            }
        }
    }
    if (window.empty()) {
        return std::nullopt;
    }
    std::sort(window.begin(), window.end());
    const double d = window[window.size() / 2];

    // Raster stores ray range: back-project along the normalized pixel ray.
    const Vec3 ray{(det.x_min + det.width_px / 2.0 - depth.cx) / depth.fx,
                   (det.y_min + det.height_px / 2.0 - depth.cy) / depth.fy, 1.0};

    LocalizedMeasurement m;
    m.p_camera = d * ray.normalized();
    m.p_world = camera_to_world(m.p_camera, mount, pose.p, pose.att);
    m.metric_width = det.width_px * d / depth.fx;
    return m;
}

IngestResult ObjectLocalizer::ingest(const Detection& det, const DepthImage& depth,
                                     const VehicleState& pose, const FrameTransform& mount,
                                     double now) {
    const auto prior = params_.size_priors.find(det.class_id);
    if (prior == params_.size_priors.end()) {
        return IngestResult::RejectedClass;
    }
    if (det.confidence < params_.confidence_threshold) {
        return IngestResult::RejectedConfidence;
    }
    const auto measurement = localize_detection(det, depth, pose, mount);
    if (!measurement) {
        return IngestResult::DroppedNoDepth;
    }
    if (measurement->p_camera.norm() > params_.range_gate) {
        return IngestResult::RejectedRange;
    }
    if (measurement->metric_width < prior->second.width_min ||
        measurement->metric_width > prior->second.width_max) {
        return IngestResult::RejectedWidth;
    }

    buffers_[det.class_id].push_back({measurement->p_world, now});
    last_observation_time_[det.class_id] = now;
    return IngestResult::Accepted;
}

std::vector<LocalizedObject> ObjectLocalizer::process_buffers(double now) {
    std::vector<LocalizedObject> reported;

    for (auto& [class_id, buffer] : buffers_) {
        if (buffer.empty() || now - last_observation_time_[class_id] < params_.quiet_window) {
            continue;
        }

        // Single-linkage Euclidean clustering via union-find.
        const std::size_t n = buffer.size();
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), 0u);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            while (parent[i] != i) {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            return i;
        };
        const double r2 = params_.cluster_radius * params_.cluster_radius;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if ((buffer[i].p_world - buffer[j].p_world).squaredNorm() <= r2) {
                    parent[find(i)] = find(j);
                }
            }
        }

        std::map<std::size_t, std::vector<std::size_t>> clusters;
        for (std::size_t i = 0; i < n; ++i) {
            clusters[find(i)].push_back(i);
        }

        for (const auto& [root, members] : clusters) {
            if (static_cast<int>(members.size()) < params_.min_cluster_support) {
                continue;  // sporadic observations are treated as noise
            }
            Vec3 mean = Vec3::Zero();
            double t_min = buffer[members.front()].time;
            double t_max = t_min;
            for (std::size_t idx : members) {
                mean += buffer[idx].p_world;
                t_min = std::min(t_min, buffer[idx].time);
                t_max = std::max(t_max, buffer[idx].time);
            }
            mean /= static_cast<double>(members.size());

            LocalizedObject* known = nullptr;
            double best_dist = params_.merge_radius;
            for (LocalizedObject& obj : objects_) {
                if (obj.class_id != class_id) {
                    continue;
                }
                const double dist = (obj.position - mean).norm();
                if (dist <= best_dist) {
                    best_dist = dist;
                    known = &obj;
                }
            }
            if (known != nullptr) {
                const double support = static_cast<double>(known->support_count);
                const double fresh = static_cast<double>(members.size());
                known->position = (support * known->position + fresh * mean) / (support + fresh);
                known->support_count += static_cast<int>(members.size());
                known->last_seen = t_max;
            } else {
                LocalizedObject obj;
                obj.class_id = class_id;
                obj.position = mean;
                obj.support_count = static_cast<int>(members.size());
                obj.first_seen = t_min;
                obj.last_seen = t_max;
                objects_.push_back(obj);
                reported.push_back(obj);
            }
        }
        buffer.clear();
    }
    return reported;
}

std::size_t ObjectLocalizer::buffered_observations() const {
    std::size_t total = 0;
    for (const auto& [class_id, buffer] : buffers_) {
        total += buffer.size();
    }
    return total;
}

std::vector<Vec3> ObjectLocalizer::serialized_list() const {
    std::vector<Vec3> list;
    list.reserve(objects_.size() + 1);
    list.push_back(Vec3::Zero());  // leading zero element of the reported list
    for (const LocalizedObject& obj : objects_) {
        list.push_back(obj.position);
    }
    return list;
}

}  // namespace tunnelpilot
