/**
 * @file geometry.hpp
 * @brief Coordinate frames and rotations: world (ENU), body (yaw-rotated
 *        world), LiDAR, camera and image frames.
 */

#pragma once

#include <Eigen/Dense>

namespace tunnelpilot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Roll/pitch/yaw in radians. Roll and pitch stay inside (-pi/2, pi/2);
/// yaw is kept wrapped to (-pi, pi].
struct Attitude {
    double roll{0.0};
    double pitch{0.0};
    double yaw{0.0};

    bool valid() const;
};

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);

/// Body-to-world rotation with ZYX Euler convention: Rz(yaw)*Ry(pitch)*Rx(roll).
Mat3 rotation_body_to_world(const Attitude& att);

/// Rigid transform (rotation then translation).
struct FrameTransform {
    Mat3 rotation{Mat3::Identity()};
    Vec3 translation{Vec3::Zero()};

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    FrameTransform inverse() const;
    /// Composition: (*this) after `inner`, i.e. result.apply(p) == apply(inner.apply(p)).
    FrameTransform compose(const FrameTransform& inner) const;
};

/// Body <- camera mount for a forward-facing camera: camera z points along
/// body x (forward), camera y is parallel to gravity (down).
FrameTransform forward_camera_mount(const Vec3& offset_in_body = Vec3::Zero());

/// Body frame is the world frame yaw-rotated about z (z antiparallel to
/// gravity), so only yaw and position enter here.
Vec3 body_to_world(const Vec3& p_body, const Vec3& body_position_w, double yaw);
Vec3 world_to_body(const Vec3& p_world, const Vec3& body_position_w, double yaw);

/// Sensor-frame chains use the full attitude: the camera is rigidly mounted
/// and tilts with the airframe.
Vec3 camera_to_world(const Vec3& p_camera, const FrameTransform& mount,
                     const Vec3& body_position_w, const Attitude& att);
Vec3 world_to_camera(const Vec3& p_world, const FrameTransform& mount,
                     const Vec3& body_position_w, const Attitude& att);

}  // namespace tunnelpilot
