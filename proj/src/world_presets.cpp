#include <cmath>
#include <stdexcept>

#include "tunnelpilot/world.hpp"

namespace tunnelpilot {

namespace {

constexpr double kMinCrossSection = 1.6;

Tunnel make_tunnel(PathBuilder& pb, std::vector<ProfileKnot> profile) {
    Tunnel t;
    t.segments = pb.build();
    t.total_length = pb.total_length();
    t.profile = std::move(profile);
    if (t.min_width() < kMinCrossSection) {
        throw std::logic_error("tunnel preset narrower than the minimum cross-section");
    }
    return t;
}

void frame_of(const Tunnel& t, double s, Vec2& point, Vec2& left, double& heading) {
    Vec2 tangent;
    t.frame_at(s, point, tangent);
    left = Vec2{-tangent.y(), tangent.x()};
    heading = std::atan2(tangent.y(), tangent.x());
}

Artifact floor_artifact(const Tunnel& main, int class_id, double s, double lateral,
                        double width, double height, double thickness) {
    Vec2 c, left;
    double heading;
    frame_of(main, s, c, left, heading);
    const Vec2 pos2 = c + lateral * left;

    Artifact a;
    a.class_id = class_id;
    a.width = width;
    a.height = height;
    a.thickness = thickness;
    a.position = Vec3{pos2.x(), pos2.y(), main.floor_z_at(s) + height / 2.0};
    a.yaw = heading + M_PI_2;  // width axis across the tunnel
    return a;
}

Obstacle pillar(const Tunnel& main, double s, double lateral, double radius,
                double top_z, const std::string& tag) {
    Vec2 c, left;
    double heading;
    frame_of(main, s, c, left, heading);
    const Vec2 pos2 = c + lateral * left;
    const double fz = main.floor_z_at(s);

    Obstacle o;
    o.shape = Obstacle::Shape::Capsule;
    o.a = Vec3{pos2.x(), pos2.y(), fz};
    o.b = Vec3{pos2.x(), pos2.y(), fz + top_z};
    o.radius = radius;
    o.tag = tag;
    return o;
}

Obstacle lateral_beam(const Tunnel& main, double s, double lat_a, double z_a,
                      double lat_b, double z_b, double radius, const std::string& tag) {
    Vec2 c, left;
    double heading;
    frame_of(main, s, c, left, heading);
    const Vec2 a2 = c + lat_a * left;
    const Vec2 b2 = c + lat_b * left;
    const double fz = main.floor_z_at(s);

    Obstacle o;
    o.shape = Obstacle::Shape::Capsule;
    o.a = Vec3{a2.x(), a2.y(), fz + z_a};
    o.b = Vec3{b2.x(), b2.y(), fz + z_b};
    o.radius = radius;
    o.tag = tag;
    return o;
}

void set_start(TunnelWorld& w, double s) {
    const Tunnel& main = w.tunnels.front();
    Vec2 c, left;
    double heading;
    frame_of(main, s, c, left, heading);
    w.start_position = Vec3{c.x(), c.y(), main.floor_z_at(s) + 0.08};
    w.start_yaw = heading;
}

TunnelWorld make_curving() {
    TunnelWorld w;
    w.name = "curving";
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(12.0).arc(25.0, 75.0 * M_PI / 180.0).straight(15.0);
    const double length = pb.total_length();
    w.tunnels.push_back(make_tunnel(pb, {{0.0, 3.5, 2.5, 0.0}, {length, 3.5, 2.5, 0.0}}));

    const Tunnel& main = w.tunnels.front();
    w.artifacts = {
        floor_artifact(main, 1, 14.0, -1.15, 0.45, 0.60, 0.30),
        floor_artifact(main, 2, 21.0, 1.20, 0.50, 0.65, 0.30),
        floor_artifact(main, 3, 29.0, -1.20, 0.40, 0.50, 0.25),
        floor_artifact(main, 4, 37.0, 1.15, 0.55, 0.70, 0.30),
        floor_artifact(main, 5, 44.0, -1.10, 0.60, 0.80, 0.35),
    };
    set_start(w, 1.5);
    w.goal_arclength = 44.0;
    w.default_t_reference = 50.0;
    w.default_altitude = 1.2;
    return w;
}

TunnelWorld make_narrow_inclined() {
    TunnelWorld w;
    w.name = "narrow_inclined";
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(16.0).arc(40.0, 30.0 * M_PI / 180.0).straight(9.0);
    const double length = pb.total_length();
    // 10% grade; waist narrows to the minimum cross-section between s=19 and 24.
    w.tunnels.push_back(make_tunnel(pb, {{0.0, 2.0, 2.2, 0.0},
                                         {16.0, 2.0, 2.2, 1.6},
                                         {19.0, 1.6, 2.2, 1.9},
                                         {24.0, 1.6, 2.2, 2.4},
                                         {27.0, 2.0, 2.2, 2.7},
                                         {length, 2.0, 2.2, 0.1 * length}}));

    const Tunnel& main = w.tunnels.front();
    w.artifacts = {
        floor_artifact(main, 6, 9.0, -0.55, 0.30, 0.45, 0.20),
        floor_artifact(main, 3, 30.0, 0.60, 0.35, 0.50, 0.25),
        floor_artifact(main, 2, 37.0, -0.60, 0.40, 0.55, 0.25),
    };
    set_start(w, 1.5);
    w.goal_arclength = 28.0;
    w.narrow_band_lo = 15.5;
    w.narrow_band_hi = 24.5;
    w.default_t_reference = 40.0;
    w.default_altitude = 1.1;
    return w;
}

TunnelWorld make_junction_obstacles() {
    TunnelWorld w;
    w.name = "junction_obstacles";
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(14.0).arc(30.0, -35.0 * M_PI / 180.0).straight(16.0);
    const double length = pb.total_length();
    w.tunnels.reserve(2);
    w.tunnels.push_back(make_tunnel(pb, {{0.0, 3.4, 2.6, 0.0}, {length, 3.4, 2.6, 0.0}}));
    const Tunnel& main = w.tunnels.front();

    // Dead-end side branch opening off the curve.
    {
        Vec2 c, left;
        double heading;
        frame_of(main, 20.0, c, left, heading);
        PathBuilder stub(c, heading + 1.0);
        stub.straight(8.0);
        w.tunnels.push_back(make_tunnel(stub, {{0.0, 2.4, 2.4, 0.0}, {8.0, 2.4, 2.4, 0.0}}));
    }

    // Free-standing pillar and a thin-beam scaffold blocking the left side.
    w.obstacles = {
        pillar(main, 26.0, -0.6, 0.16, 2.6, "pillar"),
        pillar(main, 11.0, -1.35, 0.05, 2.6, "scaffold_post"),
        pillar(main, 11.0, 1.35, 0.05, 2.6, "scaffold_post"),
        lateral_beam(main, 11.0, -1.35, 0.6, 0.1, 2.3, 0.035, "beam"),
    };

    w.artifacts = {
        floor_artifact(main, 1, 6.0, 1.20, 0.50, 0.60, 0.30),
        floor_artifact(main, 4, 18.0, -1.20, 0.45, 0.60, 0.30),
        floor_artifact(main, 5, 33.0, 1.25, 0.50, 0.70, 0.30),
        floor_artifact(main, 6, 40.0, -1.20, 0.35, 0.50, 0.20),
    };
    set_start(w, 1.5);
    w.goal_arclength = 36.0;
    w.default_t_reference = 45.0;
    w.default_altitude = 1.3;
    return w;
}

TunnelWorld make_void() {
    TunnelWorld w;
    w.name = "void";
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(45.0);
    w.tunnels.push_back(make_tunnel(pb, {{0.0, 8.0, 4.0, 0.0}, {45.0, 8.0, 4.0, 0.0}}));

    const Tunnel& main = w.tunnels.front();
    w.artifacts = {
        floor_artifact(main, 2, 12.0, -2.5, 0.45, 0.60, 0.30),
        floor_artifact(main, 3, 24.0, 2.5, 0.50, 0.60, 0.30),
        floor_artifact(main, 1, 36.0, -2.5, 0.40, 0.55, 0.25),
    };
    set_start(w, 1.5);
    w.goal_arclength = 30.0;
    w.default_t_reference = 32.0;
    w.default_altitude = 1.6;
    return w;
}

TunnelWorld make_wide_mine() {
    TunnelWorld w;
    w.name = "wide_mine";
    PathBuilder pb({0, 0}, 0.0);
    pb.straight(30.0).arc(60.0, 25.0 * M_PI / 180.0).straight(40.0);
    const double length = pb.total_length();
    w.tunnels.push_back(make_tunnel(pb, {{0.0, 12.0, 5.0, 0.0}, {length, 12.0, 5.0, 0.0}}));

    const Tunnel& main = w.tunnels.front();
    w.artifacts = {
        floor_artifact(main, 4, 15.0, -1.0, 0.60, 0.70, 0.35),
        floor_artifact(main, 5, 35.0, 1.0, 0.55, 0.75, 0.30),
    };
    set_start(w, 1.5);
    w.goal_arclength = 45.0;
    w.default_t_reference = 48.0;
    w.default_altitude = 1.8;
    return w;
}

}  // namespace

TunnelWorld TunnelWorld::preset(const std::string& name) {
    TunnelWorld w;
    if (name == "curving") {
        w = make_curving();
    } else if (name == "narrow_inclined") {
        w = make_narrow_inclined();
    } else if (name == "junction_obstacles") {
        w = make_junction_obstacles();
    } else if (name == "void") {
        w = make_void();
    } else if (name == "wide_mine") {
        w = make_wide_mine();
    } else {
        throw std::invalid_argument("unknown world preset: " + name);
    }
    w.finalize();
    return w;
}

std::vector<std::string> TunnelWorld::preset_names() {
    return {"curving", "narrow_inclined", "junction_obstacles", "void", "wide_mine"};
}

}  // namespace tunnelpilot
