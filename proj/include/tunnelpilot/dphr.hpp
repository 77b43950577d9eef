/**
 * @file dphr.hpp
 * @brief Deepest-point heading regulation: morphological preprocessing,
 *        depth clustering, and conversion of the deepest-cluster centroid to
 *        a yaw-rate reference that aligns the body x-axis with the tunnel.
 */

#pragma once

#include <optional>
#include <string>

#include "tunnelpilot/depth_image.hpp"

namespace tunnelpilot {

struct HeadingCommand {
    double yaw_rate_ref{0.0};
    double centroid_x_norm{0.0};  // s_bar_x in [-1, 1]
    bool valid{false};
};

struct DphrParams {
    int n_clusters{10};
    int kmeans_iters{20};
    int close_kernel{5};          // square structuring element side
    double yaw_gain{0.6};         // l, rad/s at full normalized offset
    double max_yaw_rate{0.5};     // rad/s
    int max_width{160};
    int max_height{120};
    double min_depth_contrast{0.25};  // m, below this the frame carries no direction
    double invalid_decay{0.5};    // command decay per frame without a valid cluster
};

/// Grayscale morphological close (dilate then erode) with a square element.
/// Window is clamped at the borders, so a constant image is unchanged.
DepthImage morphological_close(const DepthImage& img, int kernel);

struct DeepestCluster {
    double centroid_x{0.0};   // pixels (pixel centers, i.e. x + 0.5)
    double centroid_y{0.0};
    double mean_depth{0.0};   // m
    bool valid{false};
    std::vector<std::uint8_t> mask;  // 1 for member pixels, matches image size
    std::vector<double> cluster_means;  // mean depth per non-empty cluster
};

/// k-means over per-pixel depth with deterministic quantile seeding; selects
/// the cluster with maximum mean depth and returns its pixel centroid.
/// A near-constant image (depth spread below min_contrast) is reported invalid.
DeepestCluster deepest_cluster_centroid(const DepthImage& img, int n_clusters,
                                        int iters = 20, double min_contrast = 0.25);

/// s_bar_x = (s_x - c_x)/c_x clamped to [-1,1]; yaw_rate = -s_bar_x * gain,
/// clamped to max_rate. Deepest point right of center yaws clockwise (ENU).
HeadingCommand heading_command(double s_x, const DepthImage& img, double gain,
                               double max_rate);

/// Per-frame pipeline with latest-value semantics; holds the previous command
/// for decayed hold when the frame has no preferred direction.
class Dphr {
public:
    explicit Dphr(const DphrParams& params = {}) : params_(params) {}

    const DphrParams& params() const { return params_; }

    HeadingCommand process(const DepthImage& img);

    /// When set, each processed frame dumps the deepest-cluster mask with the
    /// centroid marked as <dir>/dphr_NNNNNN.pgm.
    void enable_debug_dump(const std::string& dir) { dump_dir_ = dir; }

private:
    DphrParams params_;
    HeadingCommand last_{};
    std::string dump_dir_;
    long frame_index_{0};
};

}  // namespace tunnelpilot
