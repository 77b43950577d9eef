/**
 * @file object_localizer.hpp
 * @brief Artifact localization downstream of the detector: bounding-box depth
 *        lookup, world projection, buffering with two-step outlier rejection,
 *        Euclidean clustering after a quiet window, and merging with
 *        previously reported objects.
 */

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tunnelpilot/depth_image.hpp"
#include "tunnelpilot/dynamics.hpp"

namespace tunnelpilot {

struct Detection {
    int class_id{0};           // 1..6
    double confidence{0.0};    // [0, 1]
    double x_min{0.0}, y_min{0.0};  // bbox top-left, pixels
    double width_px{0.0}, height_px{0.0};
    double frame_time{0.0};    // s
};

struct LocalizedObject {
    int class_id{0};
    Vec3 position{Vec3::Zero()};  // world frame
    int support_count{0};
    double first_seen{0.0};
    double last_seen{0.0};
};

struct ClassSizePrior {
    double width_min{0.0};  // m
    double width_max{0.0};
};

struct LocalizerParams {
    double confidence_threshold{0.5};
    double range_gate{5.0};       // m, camera-centered acceptance sphere
    double quiet_window{3.0};     // s since last observation before processing
    double cluster_radius{2.0};   // m, single-linkage threshold
    double merge_radius{3.0};     // m, association with known objects
    int min_cluster_support{5};   // clusters smaller than this are noise
    std::map<int, ClassSizePrior> size_priors{
        {1, {0.2, 0.8}}, {2, {0.2, 0.8}}, {3, {0.15, 0.7}},
        {4, {0.2, 0.9}}, {5, {0.25, 1.0}}, {6, {0.1, 0.6}},
    };
};

struct LocalizedMeasurement {
    Vec3 p_camera{Vec3::Zero()};
    Vec3 p_world{Vec3::Zero()};
    double metric_width{0.0};  // m, Wd * d / f_x
};

/// Depth lookup (median of the 3x3 window at the bbox centroid, max-range
/// pixels treated as invalid), back-projection through the pinhole model, and
/// world transform. Returns nullopt when the whole window is invalid or the
/// centroid falls outside the raster.
std::optional<LocalizedMeasurement> localize_detection(const Detection& det,
                                                       const DepthImage& depth,
                                                       const VehicleState& pose,
                                                       const FrameTransform& mount);

enum class IngestResult {
    Accepted,
    RejectedConfidence,
    RejectedRange,
    RejectedWidth,
    RejectedClass,
    DroppedNoDepth,
};

class ObjectLocalizer {
public:
    explicit ObjectLocalizer(const LocalizerParams& params = {}) : params_(params) {}

    const LocalizerParams& params() const { return params_; }

    /// Gate one detection and append it to its class buffer when accepted.
    IngestResult ingest(const Detection& det, const DepthImage& depth,
                        const VehicleState& pose, const FrameTransform& mount, double now);

    /// Cluster and report classes whose buffers have been quiet long enough.
    /// Returns newly reported objects (already merged entries update in place).
    std::vector<LocalizedObject> process_buffers(double now);

    const std::vector<LocalizedObject>& objects() const { return objects_; }
    std::size_t buffered_observations() const;

    /// Object list with the leading zero entry, one row per element.
    std::vector<Vec3> serialized_list() const;

private:
    struct Observation {
        Vec3 p_world;
        double time;
    };

    LocalizerParams params_;
    std::map<int, std::vector<Observation>> buffers_;
    std::map<int, double> last_observation_time_;
    std::vector<LocalizedObject> objects_;
};

}  // namespace tunnelpilot
