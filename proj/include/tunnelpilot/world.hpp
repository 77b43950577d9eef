/**
 * @file world.hpp
 * @brief Deterministic tunnel world: parametric centerline with a swept
 *        rectangular cross-section, obstacle and artifact primitives, signed
 *        distance queries and sphere-traced raycasting.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tunnelpilot/geometry.hpp"

namespace tunnelpilot {

using Vec2 = Eigen::Vector2d;

struct CenterlineSegment {
    enum class Kind { Line, Arc };
    Kind kind{Kind::Line};
    Vec2 anchor{0, 0};    // line start, or arc center
    double heading{0.0};  // line direction
    double radius{0.0};   // arc
    double start_angle{0.0};
    double sweep{0.0};    // signed, CCW positive
    double length{0.0};
    double s0{0.0};       // arc length at segment start

    // Derived (finalize()): cached direction and endpoint frames.
    double dir_x{1.0}, dir_y{0.0};
    Vec2 end_a{0, 0}, end_b{0, 0};
    Vec2 tan_a{1, 0}, tan_b{1, 0};

    void sample(double u, Vec2& point, Vec2& tangent) const;
    /// Planar projection: closest point parameters and signed lateral offset
    /// (positive left of the tangent). Returns squared planar distance.
    double project(const Vec2& q, double& u, double& lateral, double& axial_excess) const;
    void finalize();
};

struct ProfileKnot {
    double s{0.0};
    double width{0.0};
    double height{0.0};
    double floor_z{0.0};
};

/// One swept tunnel: C1 centerline chain plus a piecewise-linear cross-section
/// profile along arc length.
struct Tunnel {
    std::vector<CenterlineSegment> segments;
    std::vector<ProfileKnot> profile;
    double total_length{0.0};

    void interpolate_profile(double s, double& width, double& height, double& floor_z) const;
    /// Signed distance of the air region (negative inside).
    double sdf(const Vec3& p) const;
    /// Arc length of the planar projection of p.
    double arclength_of(const Vec3& p) const;
    void frame_at(double s, Vec2& point, Vec2& tangent) const;
    double floor_z_at(double s) const;
    double min_width() const;
};

/// Chains C1-continuous segments from a start pose.
class PathBuilder {
public:
    PathBuilder(const Vec2& start, double heading);
    PathBuilder& straight(double length);
    PathBuilder& arc(double radius, double sweep);  // sweep > 0 turns left
    std::vector<CenterlineSegment> build() const { return segments_; }
    double total_length() const { return s_; }

private:
    std::vector<CenterlineSegment> segments_;
    Vec2 cursor_;
    double heading_;
    double s_{0.0};
};

struct Obstacle {
    enum class Shape { Capsule, Box };
    Shape shape{Shape::Capsule};
    Vec3 a{Vec3::Zero()}, b{Vec3::Zero()};  // capsule endpoints
    double radius{0.0};
    Vec3 center{Vec3::Zero()}, half_extents{Vec3::Zero()};  // box
    double yaw{0.0};
    std::string tag;

    // Derived bounding sphere (finalize()); radius 0 disables quick rejects.
    Vec3 bound_center{Vec3::Zero()};
    double bound_radius{0.0};

    double sdf(const Vec3& p) const;  // solid: negative inside
    void finalize();
};

struct Artifact {
    int class_id{0};
    Vec3 position{Vec3::Zero()};  // box center, world frame
    double width{0.4};            // m, physical extent used by the size gate
    double height{0.4};
    double thickness{0.25};
    double yaw{0.0};

    Vec3 bound_center{Vec3::Zero()};
    double bound_radius{0.0};

    double sdf(const Vec3& p) const;
    void finalize();
};

struct RayHit {
    double range{0.0};
    int surface_id{0};  // kSurfaceWall, or obstacle/artifact ids below
};

constexpr int kSurfaceWall = -1;
constexpr int kSurfaceObstacleBase = 0;      // obstacle i -> i
constexpr int kSurfaceArtifactBase = 1000;   // artifact i -> 1000 + i

class TunnelWorld {
public:
    std::string name;
    std::vector<Tunnel> tunnels;
    std::vector<Obstacle> obstacles;
    std::vector<Artifact> artifacts;
    std::uint64_t rng_seed{0};

    Vec3 start_position{Vec3::Zero()};  // grounded start pose
    double start_yaw{0.0};
    double goal_arclength{0.0};         // "end region" threshold on the main tunnel
    double narrow_band_lo{-1.0};        // optional narrow-section annotation
    double narrow_band_hi{-1.0};
    double default_t_reference{50.0};   // preset-suggested exploration budget
    double default_altitude{1.2};       // preset-suggested mission altitude

    /// Signed distance of the free-space region: tunnels minus solids,
    /// negative inside breathable air.
    double sdf_air(const Vec3& p) const;
    /// Distance from a point to the nearest wall/obstacle/artifact surface.
    double clearance(const Vec3& p) const { return -sdf_air(p); }
    /// Which surface binds the SDF at p (meaningful near the boundary).
    int classify_surface(const Vec3& p) const;

    /// Sphere-traced ray against the air boundary with sign-change bisection.
    /// t_start is a coherence hint; marching restarts from zero when the hint
    /// does not land in free space.
    std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                  double max_range, int max_iters = 256,
                                  double t_start = 0.0) const;

    double main_arclength(const Vec3& p) const;
    double floor_z_at(const Vec3& p) const;
    double main_length() const;

    /// Sampled left/right wall outline of the main tunnel (for plot files).
    std::vector<std::array<double, 5>> outline(double step = 1.0) const;

    /// Fill derived caches (bounding spheres); presets arrive finalized.
    void finalize();

    static TunnelWorld preset(const std::string& name);
    static std::vector<std::string> preset_names();
};

}  // namespace tunnelpilot
