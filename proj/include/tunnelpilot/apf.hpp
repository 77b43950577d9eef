/**
 * @file apf.hpp
 * @brief Reactive local avoidance: potential-field repulsion over the raw
 *        LiDAR cloud with dual radii and a dust gate, plus force saturation,
 *        rate limiting and normalization.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "tunnelpilot/geometry.hpp"

namespace tunnelpilot {

/// Instantaneous LiDAR returns, relative to the sensor frame.
struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Drop non-finite points and self-returns closer than min_range.
PointCloud filter_cloud(const PointCloud& cloud, double min_range);

/// Deterministic voxel-grid thinning to at most max_points (per-voxel
/// centroids, output ordered by voxel key). Keeps the summed force
/// density-independent across scan resolutions.
PointCloud voxel_thin(const PointCloud& cloud, std::size_t max_points,
                      double initial_voxel = 0.1);

struct ApfParams {
    double r_influence{3.0};       // r_F, outer radius where points exert force
    double r_critical{0.75};       // r_c, inner safety-critical radius
    Vec3 gain{0.008, 0.008, 0.004};  // L, per-axis repulsive constant per point
    double critical_gain{0.05};    // L_c, static potential per point inside r_c
    int dust_count{3};             // n, critical term stays off if N_c <= n
    double f_max{1.0};             // repulsive magnitude saturation
    double df_max{0.1};            // repulsive per-cycle rate saturation
};

struct RepulsiveForce {
    Vec3 force{Vec3::Zero()};
    double raw_magnitude{0.0};  // |F_r| before saturation, feeds weight adaptation
};

/// Sum of per-point repulsive forces:
///   F_r = sum_{|rho|<=r_F} L o (1 - |rho|/r_F)^2 * (-rho/|rho|)
///       + sum_{|rho|<=r_c} L_c * (-rho/|rho|)      (zeroed when N_c <= n)
/// Points at the origin are skipped (undefined direction).
RepulsiveForce repulsive_force(const PointCloud& cloud, const ApfParams& params);

/// Stateful force pipeline; holds the previous cycle's saturated repulsive
/// force for rate limiting. One instance per vehicle.
class Apf {
public:
    explicit Apf(const ApfParams& params = {}) : params_(params) {}

    const ApfParams& params() const { return params_; }

    /// Saturate/rate-limit the repulsive force, normalize the attractive
    /// force to unit length if above it, sum, and normalize the total to the
    /// unit ball. Updates the retained previous repulsive force.
    Vec3 compose_force(const Vec3& attractive, const Vec3& repulsive);

    /// Full avoidance step: attractive force is the body-frame vector to the
    /// waypoint, output is the obstacle-free position reference in the body
    /// frame. raw_magnitude_out (optional) receives |F_r| before saturation.
    Vec3 avoidance_setpoint(const Vec3& wp_body, const PointCloud& cloud,
                            double* raw_magnitude_out = nullptr);

    const Vec3& previous_repulsive() const { return prev_repulsive_; }
    void reset() { prev_repulsive_.setZero(); }

private:
    ApfParams params_;
    Vec3 prev_repulsive_{Vec3::Zero()};
};

}  // namespace tunnelpilot
