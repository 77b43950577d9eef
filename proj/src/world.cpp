#include "tunnelpilot/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tunnelpilot {

namespace {

double cross2(const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

void CenterlineSegment::sample(double u, Vec2& point, Vec2& tangent) const {
    u = std::clamp(u, 0.0, length);
    if (kind == Kind::Line) {
        const Vec2 dir{std::cos(heading), std::sin(heading)};
        point = anchor + u * dir;
        tangent = dir;
    } else {
        const double dir_sign = sweep >= 0.0 ? 1.0 : -1.0;
        const double ang = start_angle + dir_sign * u / radius;
        point = anchor + radius * Vec2{std::cos(ang), std::sin(ang)};
        tangent = dir_sign * Vec2{-std::sin(ang), std::cos(ang)};
    }
}

double CenterlineSegment::project(const Vec2& q, double& u, double& lateral,
                                  double& axial_excess) const {
    if (kind == Kind::Line) {
        const double dx = q.x() - anchor.x(), dy = q.y() - anchor.y();
        const double t = dx * dir_x + dy * dir_y;
        u = std::clamp(t, 0.0, length);
        const double ex = dx - u * dir_x, ey = dy - u * dir_y;
        lateral = dir_x * ey - dir_y * ex;
        axial_excess = std::abs(t - u);
        return ex * ex + ey * ey;
    }

    const double dir_sign = sweep >= 0.0 ? 1.0 : -1.0;
    const double rx = q.x() - anchor.x(), ry = q.y() - anchor.y();
    const double theta = std::atan2(ry, rx);
    double delta = std::fmod(theta - start_angle, 2.0 * M_PI);
    if (dir_sign > 0.0 && delta < 0.0) delta += 2.0 * M_PI;
    if (dir_sign < 0.0 && delta > 0.0) delta -= 2.0 * M_PI;

    double px, py, tx, ty;  // closest point and tangent
    const double span = std::abs(sweep);
    if (std::abs(delta) <= span) {
        u = std::abs(delta) * radius;
        // Closest arc point lies along the radial direction, no trig needed.
        const double rn = std::sqrt(rx * rx + ry * ry);
        if (rn > 1e-12) {
            const double inv = radius / rn;
            px = anchor.x() + rx * inv;
            py = anchor.y() + ry * inv;
            tx = dir_sign * (-ry / rn);
            ty = dir_sign * (rx / rn);
        } else {
            px = anchor.x() + radius;
            py = anchor.y();
            tx = 0.0;
            ty = dir_sign;
        }
    } else {
        const double d0 = (q - end_a).squaredNorm();
        const double d1 = (q - end_b).squaredNorm();
        if (d0 <= d1) {
            u = 0.0;
            px = end_a.x();
            py = end_a.y();
            tx = tan_a.x();
            ty = tan_a.y();
        } else {
            u = length;
            px = end_b.x();
            py = end_b.y();
            tx = tan_b.x();
            ty = tan_b.y();
        }
    }

    const double ex = q.x() - px, ey = q.y() - py;
    lateral = tx * ey - ty * ex;
    axial_excess = std::abs(ex * tx + ey * ty);
    return ex * ex + ey * ey;
}

void CenterlineSegment::finalize() {
    dir_x = std::cos(heading);
    dir_y = std::sin(heading);
    Vec2 t0, t1;
    sample(0.0, end_a, t0);
    sample(length, end_b, t1);
    tan_a = t0;
    tan_b = t1;
}

void Tunnel::interpolate_profile(double s, double& width, double& height,
                                 double& floor_z) const {
    if (profile.size() == 1 || s <= profile.front().s) {
        width = profile.front().width;
        height = profile.front().height;
        floor_z = profile.front().floor_z;
        return;
    }
    if (s >= profile.back().s) {
        width = profile.back().width;
        height = profile.back().height;
        floor_z = profile.back().floor_z;
        return;
    }
    for (std::size_t i = 1; i < profile.size(); ++i) {
        if (s <= profile[i].s) {
            const ProfileKnot& k0 = profile[i - 1];
            const ProfileKnot& k1 = profile[i];
            const double a = (s - k0.s) / (k1.s - k0.s);
            width = k0.width + a * (k1.width - k0.width);
            height = k0.height + a * (k1.height - k0.height);
            floor_z = k0.floor_z + a * (k1.floor_z - k0.floor_z);
            return;
        }
    }
    width = profile.back().width;
    height = profile.back().height;
    floor_z = profile.back().floor_z;
}

double Tunnel::sdf(const Vec3& p) const {
    const Vec2 q{p.x(), p.y()};
    double best_d2 = std::numeric_limits<double>::infinity();
    double s = 0.0, lateral = 0.0, axial = 0.0;
    for (const CenterlineSegment& seg : segments) {
        double u, lat, ax;
        const double d2 = seg.project(q, u, lat, ax);
        if (d2 < best_d2) {
            best_d2 = d2;
            s = seg.s0 + u;
            lateral = lat;
            axial = ax;
        }
    }

    double width, height, floor_z;
    interpolate_profile(s, width, height, floor_z);
    const double dz = p.z() - (floor_z + height / 2.0);
    const double e_lat = std::abs(lateral) - width / 2.0;
    const double e_z = std::abs(dz) - height / 2.0;
    const double e_ax = axial;

    if (e_lat <= 0.0 && e_z <= 0.0 && e_ax <= 1e-12) {
        const double cap_dist = std::min(s, total_length - s);
        return -std::min({-e_lat, -e_z, cap_dist});
    }
    const double ox = std::max(e_lat, 0.0);
    const double oz = std::max(e_z, 0.0);
    return std::sqrt(ox * ox + oz * oz + e_ax * e_ax);
}

double Tunnel::arclength_of(const Vec3& p) const {
    const Vec2 q{p.x(), p.y()};
    double best_d2 = std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (const CenterlineSegment& seg : segments) {
        double u, lat, ax;
        const double d2 = seg.project(q, u, lat, ax);
        if (d2 < best_d2) {
            best_d2 = d2;
            s = seg.s0 + u;
        }
    }
    return s;
}

void Tunnel::frame_at(double s, Vec2& point, Vec2& tangent) const {
    s = std::clamp(s, 0.0, total_length);
    for (const CenterlineSegment& seg : segments) {
        if (s <= seg.s0 + seg.length || &seg == &segments.back()) {
            seg.sample(s - seg.s0, point, tangent);
            return;
        }
    }
}

double Tunnel::floor_z_at(double s) const {
    double w, h, fz;
    interpolate_profile(s, w, h, fz);
    return fz;
}

double Tunnel::min_width() const {
    double w = std::numeric_limits<double>::infinity();
    for (const ProfileKnot& k : profile) {
        w = std::min(w, k.width);
    }
    return w;
}

PathBuilder::PathBuilder(const Vec2& start, double heading)
    : cursor_(start), heading_(heading) {}

PathBuilder& PathBuilder::straight(double length) {
    CenterlineSegment seg;
    seg.kind = CenterlineSegment::Kind::Line;
    seg.anchor = cursor_;
    seg.heading = heading_;
    seg.length = length;
    seg.s0 = s_;
    seg.finalize();
    segments_.push_back(seg);
    cursor_ += length * Vec2{std::cos(heading_), std::sin(heading_)};
    s_ += length;
    return *this;
}

PathBuilder& PathBuilder::arc(double radius, double sweep) {
    CenterlineSegment seg;
    seg.kind = CenterlineSegment::Kind::Arc;
    seg.radius = radius;
    seg.sweep = sweep;
    seg.length = radius * std::abs(sweep);
    seg.s0 = s_;
    // Center sits perpendicular to the current heading, on the turn side.
    const double side = sweep >= 0.0 ? 1.0 : -1.0;
    const Vec2 normal{-std::sin(heading_), std::cos(heading_)};
    seg.anchor = cursor_ + side * radius * normal;
    seg.start_angle = std::atan2(cursor_.y() - seg.anchor.y(), cursor_.x() - seg.anchor.x());
    seg.finalize();
    segments_.push_back(seg);

    const double end_angle = seg.start_angle + sweep;
    cursor_ = seg.anchor + radius * Vec2{std::cos(end_angle), std::sin(end_angle)};
    heading_ = wrap_angle(heading_ + sweep);
    s_ += seg.length;
    return *this;
}

double Obstacle::sdf(const Vec3& p) const {
    if (shape == Shape::Capsule) {
        const Vec3 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        return (p - (a + t * ab)).norm() - radius;
    }
    const double c = std::cos(-yaw), s = std::sin(-yaw);
    const Vec3 rel = p - center;
    const Vec3 q{c * rel.x() - s * rel.y(), s * rel.x() + c * rel.y(), rel.z()};
    const Vec3 e = q.cwiseAbs() - half_extents;
    const Vec3 outside = e.cwiseMax(0.0);
    return outside.norm() + std::min(e.maxCoeff(), 0.0);
}

double Artifact::sdf(const Vec3& p) const {
    const double c = std::cos(-yaw), s = std::sin(-yaw);
    const Vec3 rel = p - position;
    const Vec3 q{c * rel.x() - s * rel.y(), s * rel.x() + c * rel.y(), rel.z()};
    const Vec3 he{width / 2.0, thickness / 2.0, height / 2.0};
    const Vec3 e = q.cwiseAbs() - he;
    const Vec3 outside = e.cwiseMax(0.0);
    return outside.norm() + std::min(e.maxCoeff(), 0.0);
}

void Obstacle::finalize() {
    if (shape == Shape::Capsule) {
        bound_center = 0.5 * (a + b);
        bound_radius = 0.5 * (b - a).norm() + radius;
    } else {
        bound_center = center;
        bound_radius = half_extents.norm();
    }
}

void Artifact::finalize() {
    bound_center = position;
    bound_radius = 0.5 * Vec3{width, thickness, height}.norm();
}

void TunnelWorld::finalize() {
    for (Obstacle& o : obstacles) {
        o.finalize();
    }
    for (Artifact& a : artifacts) {
        a.finalize();
    }
}

double TunnelWorld::sdf_air(const Vec3& p) const {
    double phi = 1e9;
    if (tunnels.empty()) {
        phi = -1e9;  // open void world
    }
    for (const Tunnel& t : tunnels) {
        phi = std::min(phi, t.sdf(p));
    }
    // A solid binds max(phi, -sdf) only if sdf < -phi; the bounding sphere
    // gives a cheap lower bound on sdf.
    for (const Obstacle& o : obstacles) {
        if (o.bound_radius > 0.0 &&
            (p - o.bound_center).squaredNorm() >
                (o.bound_radius - phi) * (o.bound_radius - phi)) {
            continue;
        }
        phi = std::max(phi, -o.sdf(p));
    }
    for (const Artifact& a : artifacts) {
        if (a.bound_radius > 0.0 &&
            (p - a.bound_center).squaredNorm() >
                (a.bound_radius - phi) * (a.bound_radius - phi)) {
            continue;
        }
        phi = std::max(phi, -a.sdf(p));
    }
    return phi;
}

int TunnelWorld::classify_surface(const Vec3& p) const {
    double best = 1e9;
    if (tunnels.empty()) {
        best = -1e9;
    }
    for (const Tunnel& t : tunnels) {
        best = std::min(best, t.sdf(p));
    }
    int id = kSurfaceWall;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const double v = -obstacles[i].sdf(p);
        if (v > best) {
            best = v;
            id = kSurfaceObstacleBase + static_cast<int>(i);
        }
    }
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const double v = -artifacts[i].sdf(p);
        if (v > best) {
            best = v;
            id = kSurfaceArtifactBase + static_cast<int>(i);
        }
    }
    return id;
}

std::optional<RayHit> TunnelWorld::raycast(const Vec3& origin, const Vec3& dir,
                                           double max_range, int max_iters,
                                           double t_start) const {
    double t_prev = t_start;
    double phi_prev = sdf_air(origin + t_prev * dir);
    if (phi_prev >= 0.0) {
        if (t_prev > 0.0) {
            t_prev = 0.0;  // coherence guess landed in rock, restart
            phi_prev = sdf_air(origin);
        }
        if (phi_prev >= 0.0) {
            return RayHit{0.0, classify_surface(origin)};  // started in or on rock
        }
    }

    for (int iter = 0; iter < max_iters; ++iter) {
        const double step = std::max(0.93 * (-phi_prev), 0.02);
        const double t = t_prev + step;
        if (t > max_range) {
            return std::nullopt;
        }
        const double phi = sdf_air(origin + t * dir);
        if (phi >= 0.0) {
            double lo = t_prev, hi = t;
            for (int i = 0; i < 24 && hi - lo > 1e-4; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (sdf_air(origin + mid * dir) >= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            const double t_hit = 0.5 * (lo + hi);
            return RayHit{t_hit, classify_surface(origin + t_hit * dir)};
        }
        t_prev = t;
        phi_prev = phi;
    }
    return std::nullopt;
}

double TunnelWorld::main_arclength(const Vec3& p) const {
    return tunnels.empty() ? 0.0 : tunnels.front().arclength_of(p);
}

double TunnelWorld::floor_z_at(const Vec3& p) const {
    if (tunnels.empty()) {
        return 0.0;
    }
    // Floor of the planar-nearest tunnel.
    const Vec2 q{p.x(), p.y()};
    const Tunnel* best_tunnel = &tunnels.front();
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (const Tunnel& t : tunnels) {
        for (const CenterlineSegment& seg : t.segments) {
            double u, lat, ax;
            const double d2 = seg.project(q, u, lat, ax);
            if (d2 < best_d2) {
                best_d2 = d2;
                best_tunnel = &t;
                best_s = seg.s0 + u;
            }
        }
    }
    return best_tunnel->floor_z_at(best_s);
}

double TunnelWorld::main_length() const {
    return tunnels.empty() ? 0.0 : tunnels.front().total_length;
}

std::vector<std::array<double, 5>> TunnelWorld::outline(double step) const {
    std::vector<std::array<double, 5>> rows;
    if (tunnels.empty()) {
        return rows;
    }
    const Tunnel& t = tunnels.front();
    for (double s = 0.0; s <= t.total_length; s += step) {
        Vec2 c, tan;
        t.frame_at(s, c, tan);
        double w, h, fz;
        t.interpolate_profile(s, w, h, fz);
        const Vec2 left = c + (w / 2.0) * Vec2{-tan.y(), tan.x()};
        const Vec2 right = c - (w / 2.0) * Vec2{-tan.y(), tan.x()};
        rows.push_back({s, left.x(), left.y(), right.x(), right.y()});
    }
    return rows;
}

}  // namespace tunnelpilot
