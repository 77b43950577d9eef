#include <doctest.h>

#include <cmath>
#include <random>

#include "tunnelpilot/geometry.hpp"

using namespace tunnelpilot;

TEST_CASE("yaw rotation basics") {
    CHECK(body_to_world({1, 0, 0}, {0, 0, 0}, 0.0).isApprox(Vec3{1, 0, 0}, 1e-12));
    // Quarter turn CCW under ENU.
    const Vec3 q = body_to_world({1, 0, 0}, {0, 0, 0}, M_PI_2);
    CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.y() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("body_to_world matches plain trig oracle") {
    // Independent 2D rotation oracle, no matrices.
    const Vec3 p_b{1, 2, 0};
    const double yaw = 0.3;
    const Vec3 pos{5, 5, 1};
    const double ox = std::cos(yaw) * 1.0 - std::sin(yaw) * 2.0 + 5.0;
    const double oy = std::sin(yaw) * 1.0 + std::cos(yaw) * 2.0 + 5.0;
    const Vec3 got = body_to_world(p_b, pos, yaw);
    CHECK(got.x() == doctest::Approx(ox).epsilon(1e-12));
    CHECK(got.y() == doctest::Approx(oy).epsilon(1e-12));
    CHECK(got.z() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("world/body round trip and z preservation") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        const Vec3 pos{u(rng), u(rng), u(rng)};
        const double yaw = ang(rng);
        const Vec3 round = world_to_body(body_to_world(p, pos, yaw), pos, yaw);
        CHECK((round - p).norm() < 1e-9);
        // Yaw-only rotation leaves z untouched exactly.
        CHECK(body_to_world(p, Vec3::Zero(), yaw).z() == p.z());
    }
}

TEST_CASE("rotation matrices are orthonormal") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-1.2, 1.2);
    for (int i = 0; i < 50; ++i) {
        const Attitude att{ang(rng), ang(rng), ang(rng)};
        const Mat3 r = rotation_body_to_world(att);
        CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-9);
    }
}

TEST_CASE("transform inverse composes to identity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 20; ++i) {
        FrameTransform t;
        t.rotation = rotation_body_to_world({u(rng) * 0.2, u(rng) * 0.2, u(rng)});
        t.translation = Vec3{u(rng), u(rng), u(rng)};
        const FrameTransform id = t.compose(t.inverse());
        CHECK((id.rotation - Mat3::Identity()).norm() < 1e-9);
        CHECK(id.translation.norm() < 1e-9);
    }
}

TEST_CASE("camera chain: forward-mounted axis alignment") {
    const FrameTransform mount = forward_camera_mount();

    // Optical axis point two meters out sits two meters ahead of the vehicle.
    const Vec3 ahead = camera_to_world({0, 0, 2}, mount, Vec3::Zero(), Attitude{});
    CHECK(ahead.isApprox(Vec3{2, 0, 0}, 1e-12));

    // Camera origin maps to vehicle position plus the yaw-rotated offset.
    const FrameTransform offset_mount = forward_camera_mount({0.1, 0.0, -0.05});
    const Vec3 pos{3, -2, 1};
    const double yaw = 1.1;
    const Vec3 origin = camera_to_world({0, 0, 0}, offset_mount, pos, Attitude{0, 0, yaw});
    const Vec3 expected = pos + rot_z(yaw) * Vec3{0.1, 0.0, -0.05};
    CHECK((origin - expected).norm() < 1e-12);
}

TEST_CASE("camera/world round trip") {
    const FrameTransform mount = forward_camera_mount({0.12, 0.03, -0.02});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> small(-0.3, 0.3);
    for (int i = 0; i < 100; ++i) {
        const Attitude att{small(rng), small(rng), u(rng)};
        const Vec3 pos{u(rng), u(rng), u(rng)};
        const Vec3 p_c{u(rng), u(rng), std::abs(u(rng)) + 0.1};
        const Vec3 back = world_to_camera(camera_to_world(p_c, mount, pos, att), mount, pos, att);
        CHECK((back - p_c).norm() < 1e-9);
    }
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    for (double a = -20.0; a <= 20.0; a += 0.137) {
        const double w = wrap_angle(a);
        CHECK(w > -M_PI - 1e-12);
        CHECK(w <= M_PI + 1e-12);
        // Same angle modulo 2*pi.
        CHECK(std::abs(std::remainder(w - a, 2.0 * M_PI)) < 1e-9);
    }
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
}
