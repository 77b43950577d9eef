#include <doctest.h>

#include <cmath>

#include "tunnelpilot/mission.hpp"

using namespace tunnelpilot;

namespace {

// Drive the executive through preflight and takeoff to hovering EXPLORE.
MissionExecutive airborne_executive(VehicleState& state, MissionParams prm = {}) {
    MissionExecutive exec(prm);
    exec.notify_sensors(true, true, true);
    HeadingCommand heading;
    state.p.z() = 0.08;
    double beam = 0.08;
    for (int i = 0; i < 2000 && exec.phase() != MissionPhase::Explore; ++i) {
        const MissionCommand cmd = exec.tick(state, beam, heading, 0.1);
        if (cmd.position_active) {
            // Idealized altitude response: follow the z offset directly.
            state.p.z() += cmd.wp_body.z() * 0.5;
            beam = state.p.z();
        }
    }
    REQUIRE(exec.phase() == MissionPhase::Explore);
    return exec;
}

}  // namespace

TEST_CASE("altitude from range compensates tilt") {
    CHECK(altitude_from_range(2.0, {0, 0, 0}) == doctest::Approx(2.0));
    CHECK(altitude_from_range(2.0, {0.0, 0.2, 0.0}) ==
          doctest::Approx(2.0 * std::cos(0.2)).epsilon(1e-9));
    CHECK(altitude_from_range(2.0, {0.2, 0.2, 0.0}) ==
          doctest::Approx(2.0 * std::cos(0.2) * std::cos(0.2)).epsilon(1e-9));
}

TEST_CASE("explore waypoint composition") {
    const Vec3 wp = explore_waypoint(1.2, 1.5, 1.0);
    CHECK((wp - Vec3{1.0, 0.0, 0.3}).norm() < 1e-12);
    const Vec3 at_setpoint = explore_waypoint(1.5, 1.5, 1.0);
    CHECK(at_setpoint.z() == doctest::Approx(0.0));
}

TEST_CASE("preflight waits for sensors") {
    MissionExecutive exec;
    VehicleState state;
    const MissionCommand cmd = exec.tick(state, 0.1, HeadingCommand{}, 0.1);
    CHECK(exec.phase() == MissionPhase::Preflight);
    CHECK_FALSE(cmd.position_active);
    exec.notify_sensors(true, true, true);
    exec.tick(state, 0.1, HeadingCommand{}, 0.1);
    CHECK(exec.phase() == MissionPhase::Takeoff);
}

TEST_CASE("explore emits the carrot and records crumbs by distance") {
    MissionParams prm;
    prm.crumb_spacing = 2.0;
    VehicleState state;
    MissionExecutive exec = airborne_executive(state, prm);
    const std::size_t initial_crumbs = exec.breadcrumbs().size();
    REQUIRE(initial_crumbs == 1);  // take-off point

    HeadingCommand heading;
    heading.yaw_rate_ref = 0.1;
    heading.valid = true;

    // Travel 3.0 m in 0.1 m steps: exactly one new crumb.
    for (int i = 0; i < 30; ++i) {
        state.p.x() += 0.1;
        const MissionCommand cmd = exec.tick(state, state.p.z(), heading, 0.1);
        CHECK(cmd.phase == MissionPhase::Explore);
        CHECK(cmd.wp_body.x() == doctest::Approx(prm.carrot_distance));
        CHECK(cmd.wp_body.y() == 0.0);
        CHECK(cmd.yaw_mode == YawMode::Rate);
        CHECK(cmd.yaw_rate_ref == doctest::Approx(0.1));
        CHECK(cmd.apf_active);
        CHECK(cmd.dphr_active);
    }
    CHECK(exec.breadcrumbs().size() == initial_crumbs + 1);
}

TEST_CASE("timer expiry turns the mission around with a pi yaw target") {
    MissionParams prm;
    prm.t_reference = 0.5;
    VehicleState state;
    state.att.yaw = 0.7;
    MissionExecutive exec = airborne_executive(state, prm);

    HeadingCommand heading;
    MissionCommand cmd;
    for (int i = 0; i < 10 && exec.phase() == MissionPhase::Explore; ++i) {
        cmd = exec.tick(state, state.p.z(), heading, 0.1);
    }
    REQUIRE(exec.phase() == MissionPhase::Return);
    CHECK(cmd.yaw_mode == YawMode::Angle);
    CHECK(cmd.psi_ref == doctest::Approx(wrap_angle(0.7 + M_PI)));
    CHECK_FALSE(cmd.dphr_active);
}

TEST_CASE("return pops crumbs in reverse and lands at the start") {
    MissionParams prm;
    prm.t_reference = 1e9;  // manual turnaround via stop-less timer is skipped
    VehicleState state;
    MissionExecutive exec = airborne_executive(state, prm);

    // Walk out 10 m, dropping crumbs.
    HeadingCommand heading;
    for (int i = 0; i < 100; ++i) {
        state.p.x() += 0.1;
        exec.tick(state, state.p.z(), heading, 0.1);
    }
    const std::size_t crumbs = exec.breadcrumbs().size();
    REQUIRE(crumbs >= 5);

    // Force the turnaround by exhausting a fresh executive's timer instead:
    // emulate by re-running with a short deadline is heavier; here we verify
    // reverse-order consumption by replaying RETURN directly.
    MissionParams prm2;
    prm2.t_reference = 0.2;
    VehicleState state2;
    MissionExecutive exec2 = airborne_executive(state2, prm2);
    for (int i = 0; i < 80; ++i) {
        state2.p.x() += 0.1;
        exec2.tick(state2, state2.p.z(), HeadingCommand{}, 0.1);
        if (exec2.phase() == MissionPhase::Return) {
            break;
        }
    }
    REQUIRE(exec2.phase() == MissionPhase::Return);

    double last_x = 1e9;
    int guard = 0;
    while (exec2.phase() == MissionPhase::Return && ++guard < 2000) {
        const MissionCommand cmd = exec2.tick(state2, state2.p.z(), HeadingCommand{}, 0.1);
        if (exec2.phase() != MissionPhase::Return) {
            break;
        }
        // Active crumb x must never increase: strict reverse order.
        const double target_x = state2.p.x() + cmd.wp_body.x() * std::cos(state2.att.yaw) -
                                cmd.wp_body.y() * std::sin(state2.att.yaw);
        CHECK(target_x <= last_x + 1e-9);
        last_x = target_x;
        // Fly toward the crumb.
        const Vec3 step = cmd.wp_body.normalized() * 0.08;
        state2.p += Vec3{std::cos(state2.att.yaw) * step.x() - std::sin(state2.att.yaw) * step.y(),
                         std::sin(state2.att.yaw) * step.x() + std::cos(state2.att.yaw) * step.y(),
                         step.z()};
    }
    REQUIRE(exec2.phase() == MissionPhase::Land);
    CHECK((state2.p.head<2>() - exec2.takeoff_position().head<2>()).norm() <
          prm2.arrival_radius);

    // Touch down.
    guard = 0;
    double beam = state2.p.z();
    while (exec2.phase() == MissionPhase::Land && ++guard < 2000) {
        const MissionCommand cmd = exec2.tick(state2, beam, HeadingCommand{}, 0.1);
        state2.p.z() += cmd.wp_body.z() * 0.5;
        beam = std::max(state2.p.z(), 0.0);
    }
    CHECK(exec2.phase() == MissionPhase::Done);
}

TEST_CASE("phase never regresses from return to explore") {
    MissionParams prm;
    prm.t_reference = 0.3;
    VehicleState state;
    MissionExecutive exec = airborne_executive(state, prm);
    bool saw_return = false;
    for (int i = 0; i < 50; ++i) {
        state.p.x() += 0.05;
        exec.tick(state, state.p.z(), HeadingCommand{}, 0.1);
        if (exec.phase() == MissionPhase::Return) {
            saw_return = true;
        }
        if (saw_return) {
            CHECK(exec.phase() != MissionPhase::Explore);
        }
    }
    CHECK(saw_return);
}

TEST_CASE("stop lands in place from any phase") {
    SUBCASE("stop while grounded") {
        MissionExecutive exec;
        VehicleState state;
        exec.request_stop();
        exec.tick(state, 0.08, HeadingCommand{}, 0.1);
        CHECK(exec.phase() == MissionPhase::Stopped);
    }
    SUBCASE("stop mid-explore") {
        VehicleState state;
        MissionExecutive exec = airborne_executive(state);
        exec.request_stop();
        MissionCommand cmd = exec.tick(state, state.p.z(), HeadingCommand{}, 0.1);
        CHECK(exec.phase() == MissionPhase::Land);
        double beam = state.p.z();
        for (int i = 0; i < 2000 && exec.phase() == MissionPhase::Land; ++i) {
            cmd = exec.tick(state, beam, HeadingCommand{}, 0.1);
            state.p.z() += cmd.wp_body.z() * 0.5;
            beam = std::max(state.p.z(), 0.0);
        }
        CHECK(exec.phase() == MissionPhase::Stopped);
    }
}

TEST_CASE("altitude hold flags degraded on beam dropout") {
    VehicleState state;
    MissionExecutive exec = airborne_executive(state);
    exec.tick(state, std::numeric_limits<double>::quiet_NaN(), HeadingCommand{}, 0.1);
    CHECK(exec.altitude_degraded());
    // Command still sane: holds the last valid altitude.
    const MissionCommand cmd =
        exec.tick(state, std::numeric_limits<double>::quiet_NaN(), HeadingCommand{}, 0.1);
    CHECK(std::isfinite(cmd.wp_body.z()));
}
