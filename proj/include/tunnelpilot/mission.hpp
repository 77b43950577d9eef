/**
 * @file mission.hpp
 * @brief Mission executive: pre-flight, take-off, carrot-chasing exploration
 *        with depth-based heading, breadcrumb recording, timed turnaround,
 *        breadcrumb-following return, landing, and STOP override.
 */

#pragma once

#include <string>
#include <vector>

#include "tunnelpilot/dphr.hpp"
#include "tunnelpilot/dynamics.hpp"

namespace tunnelpilot {

enum class MissionPhase { Preflight, Takeoff, Explore, Return, Land, Done, Stopped };

const char* phase_name(MissionPhase phase);

struct Breadcrumb {
    Vec3 position{Vec3::Zero()};  // world frame
    double yaw{0.0};
};

struct MissionParams {
    double t_reference{55.0};      // s, exploration time budget
    double altitude_setpoint{1.2}; // p_z^m, m above ground
    double carrot_distance{1.0};   // m ahead on body x during exploration
    double crumb_spacing{2.0};     // m of travel between breadcrumbs
    double arrival_radius{1.5};    // m, breadcrumb removal radius
    double takeoff_rate{0.5};      // m/s climb
    double land_rate{0.5};         // m/s descent
    double hover_settle{2.0};      // s of stabilization after reaching altitude
    double altitude_tolerance{0.15};
    double touchdown_height{0.12}; // m above ground counts as landed
};

enum class YawMode { Rate, Angle };

struct MissionCommand {
    Vec3 wp_body{Vec3::Zero()};
    YawMode yaw_mode{YawMode::Rate};
    double yaw_rate_ref{0.0};
    double psi_ref{0.0};
    MissionPhase phase{MissionPhase::Preflight};
    bool position_active{false};  // false while grounded (Preflight/Done/Stopped)
    bool apf_active{false};       // potential field applied to the waypoint
    bool dphr_active{false};      // heading from the depth pipeline
};

struct MissionEvent {
    double time{0.0};
    std::string what;
};

/// Tilt-compensated height above ground from the downward single-beam range:
/// p_z^L = R * cos(pitch) * cos(roll).
double altitude_from_range(double range, const Attitude& att);

/// Carrot waypoint during exploration: constant step ahead on body x, zero
/// lateral offset, z toward the mission altitude.
Vec3 explore_waypoint(double p_z_measured, double p_z_mission, double carrot);

class MissionExecutive {
public:
    explicit MissionExecutive(const MissionParams& params = {}) : params_(params) {}

    const MissionParams& params() const { return params_; }
    MissionPhase phase() const { return phase_; }
    double clock() const { return clock_; }
    const std::vector<Breadcrumb>& breadcrumbs() const { return crumbs_; }
    const std::vector<MissionEvent>& events() const { return events_; }
    const Vec3& takeoff_position() const { return takeoff_position_; }
    bool altitude_degraded() const { return altitude_degraded_; }

    /// Mark sensors alive; Preflight completes once all feeds have been seen.
    void notify_sensors(bool lidar_seen, bool depth_seen, bool beam_seen);

    /// Immediate land-in-place override, honored from any phase.
    void request_stop();

    /// Advance the mission by dt. beam_range is the raw downward range
    /// (NaN when the beam had no return); heading is the latest depth-based
    /// yaw command.
    MissionCommand tick(const VehicleState& state, double beam_range,
                        const HeadingCommand& heading, double dt);

private:
    void transition(MissionPhase next, double reason_time, const std::string& why);

    MissionParams params_;
    MissionPhase phase_{MissionPhase::Preflight};
    double clock_{0.0};
    bool stop_requested_{false};

    bool lidar_seen_{false}, depth_seen_{false}, beam_seen_{false};

    double altitude_{0.0};  // latest valid p_z^L
    bool altitude_valid_{false};
    bool altitude_degraded_{false};

    Vec3 takeoff_position_{Vec3::Zero()};
    double takeoff_ramp_{0.0};
    double settle_clock_{0.0};
    double explore_deadline_{0.0};

    std::vector<Breadcrumb> crumbs_;
    Vec3 last_crumb_anchor_{Vec3::Zero()};
    double travel_since_crumb_{0.0};
    Vec3 last_position_{Vec3::Zero()};
    bool has_last_position_{false};

    double return_yaw_ref_{0.0};
    bool turnaround_active_{false};

    double land_target_z_{0.0};

    std::vector<MissionEvent> events_;
};

}  // namespace tunnelpilot
