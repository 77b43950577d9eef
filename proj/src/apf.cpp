#include "tunnelpilot/apf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

namespace tunnelpilot {

PointCloud filter_cloud(const PointCloud& cloud, double min_range) {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) {
        if (p.allFinite() && p.norm() >= min_range) {
            out.points.push_back(p);
        }
    }
    return out;
}

PointCloud voxel_thin(const PointCloud& cloud, std::size_t max_points, double initial_voxel) {
    if (cloud.points.size() <= max_points) {
        return cloud;
    }
    double voxel = initial_voxel;
    for (int attempt = 0; attempt < 24; ++attempt) {
        // Keyed map keeps output order independent of input permutation.
        std::map<std::tuple<int64_t, int64_t, int64_t>, std::pair<Vec3, int>> cells;
        for (const Vec3& p : cloud.points) {
            const auto key = std::make_tuple(static_cast<int64_t>(std::floor(p.x() / voxel)),
                                             static_cast<int64_t>(std::floor(p.y() / voxel)),
                                             static_cast<int64_t>(std::floor(p.z() / voxel)));
            auto& cell = cells[key];
            if (cell.second == 0) {
                cell.first = p;
            } else {
                cell.first += p;
            }
            cell.second += 1;
        }
        if (cells.size() <= max_points) {
            PointCloud out;
            out.points.reserve(cells.size());
            for (const auto& [key, cell] : cells) {
                out.points.push_back(cell.first / cell.second);
            }
            return out;
        }
        voxel *= 1.5;
    }
    PointCloud out = cloud;
    out.points.resize(max_points);
    return out;
}

RepulsiveForce repulsive_force(const PointCloud& cloud, const ApfParams& params) {
    Vec3 influence_sum = Vec3::Zero();
    Vec3 critical_sum = Vec3::Zero();
    int critical_count = 0;

    for (const Vec3& rho : cloud.points) {
        const double dist = rho.norm();
        if (dist == 0.0 || dist > params.r_influence) {
            continue;
        }
        const Vec3 dir = -rho / dist;
        const double falloff = 1.0 - dist / params.r_influence;
        influence_sum += params.gain.cwiseProduct(falloff * falloff * dir);
        if (dist <= params.r_critical) {
            critical_sum += params.critical_gain * dir;
            ++critical_count;
        }
    }

    RepulsiveForce out;
    out.force = influence_sum;
    if (critical_count > params.dust_count) {
        out.force += critical_sum;
    }
    out.raw_magnitude = out.force.norm();
    return out;
}

Vec3 Apf::compose_force(const Vec3& attractive, const Vec3& repulsive) {
    Vec3 f_r = repulsive;

    const double mag = f_r.norm();
    if (mag > params_.f_max) {
        f_r *= params_.f_max / mag;
    }

    const Vec3 delta = f_r - prev_repulsive_;
    const double delta_mag = delta.norm();
    if (delta_mag > params_.df_max) {
        f_r = prev_repulsive_ + delta * (params_.df_max / delta_mag);
    }

    Vec3 f_a = attractive;
    const double a_mag = f_a.norm();
    if (a_mag > 1.0) {
        f_a /= a_mag;
    }

    prev_repulsive_ = f_r;

    Vec3 f = f_r + f_a;
    const double f_mag = f.norm();
    if (f_mag > 1.0) {
        f /= f_mag;
    }
    return f;
}

Vec3 Apf::avoidance_setpoint(const Vec3& wp_body, const PointCloud& cloud,
                             double* raw_magnitude_out) {
    const RepulsiveForce rep = repulsive_force(cloud, params_);
    if (raw_magnitude_out != nullptr) {
        *raw_magnitude_out = rep.raw_magnitude;
    }
    // Attractive force is the vector from the current position (body origin)
    // to the waypoint; the reference is F + p_hat^B with p_hat^B = 0.
    return compose_force(wp_body, rep.force);
}

}  // namespace tunnelpilot
