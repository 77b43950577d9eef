#include "tunnelpilot/geometry.hpp"

#include <cmath>

namespace tunnelpilot {

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) {
        a += 2.0 * M_PI;
    }
    return a - M_PI;
}

bool Attitude::valid() const {
    return std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw) &&
           std::abs(roll) < M_PI_2 && std::abs(pitch) < M_PI_2;
}

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return r;
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

Mat3 rotation_body_to_world(const Attitude& att) {
    return rot_z(att.yaw) * rot_y(att.pitch) * rot_x(att.roll);
}

FrameTransform FrameTransform::inverse() const {
    FrameTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

FrameTransform FrameTransform::compose(const FrameTransform& inner) const {
    FrameTransform out;
    out.rotation = rotation * inner.rotation;
    out.translation = rotation * inner.translation + translation;
    return out;
}

FrameTransform forward_camera_mount(const Vec3& offset_in_body) {
    // Columns map camera axes into body axes:
    //   x_C (image right) -> -y_B, y_C (image down) -> -z_B, z_C (optical) -> +x_B
    FrameTransform mount;
    mount.rotation << 0, 0, 1,
                      -1, 0, 0,
                      0, -1, 0;
    mount.translation = offset_in_body;
    return mount;
}

Vec3 body_to_world(const Vec3& p_body, const Vec3& body_position_w, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * p_body.x() - s * p_body.y() + body_position_w.x(),
            s * p_body.x() + c * p_body.y() + body_position_w.y(),
            p_body.z() + body_position_w.z()};
}

Vec3 world_to_body(const Vec3& p_world, const Vec3& body_position_w, double yaw) {
    const Vec3 d = p_world - body_position_w;
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 camera_to_world(const Vec3& p_camera, const FrameTransform& mount,
                     const Vec3& body_position_w, const Attitude& att) {
    const Vec3 p_body = mount.apply(p_camera);
    return rotation_body_to_world(att) * p_body + body_position_w;
}

Vec3 world_to_camera(const Vec3& p_world, const FrameTransform& mount,
                     const Vec3& body_position_w, const Attitude& att) {
    const Vec3 p_body = rotation_body_to_world(att).transpose() * (p_world - body_position_w);
    return mount.inverse().apply(p_body);
}

}  // namespace tunnelpilot
