#include "tunnelpilot/mission.hpp"

#include <cmath>

namespace tunnelpilot {

const char* phase_name(MissionPhase phase) {
    switch (phase) {
        case MissionPhase::Preflight: return "PREFLIGHT";
        case MissionPhase::Takeoff: return "TAKEOFF";
        case MissionPhase::Explore: return "EXPLORE";
        case MissionPhase::Return: return "RETURN";
        case MissionPhase::Land: return "LAND";
        case MissionPhase::Done: return "DONE";
        case MissionPhase::Stopped: return "STOPPED";
    }
    return "?";
}

double altitude_from_range(double range, const Attitude& att) {
    return range * std::cos(att.pitch) * std::cos(att.roll);
}

Vec3 explore_waypoint(double p_z_measured, double p_z_mission, double carrot) {
    return {carrot, 0.0, p_z_mission - p_z_measured};
}

void MissionExecutive::notify_sensors(bool lidar_seen, bool depth_seen, bool beam_seen) {
    lidar_seen_ |= lidar_seen;
    depth_seen_ |= depth_seen;
    beam_seen_ |= beam_seen;
}

void MissionExecutive::request_stop() {
    stop_requested_ = true;
}

void MissionExecutive::transition(MissionPhase next, double reason_time, const std::string& why) {
    phase_ = next;
    events_.push_back({reason_time, std::string(phase_name(next)) + ": " + why});
}

MissionCommand MissionExecutive::tick(const VehicleState& state, double beam_range,
                                      const HeadingCommand& heading, double dt) {
    clock_ += dt;

    if (std::isfinite(beam_range) && beam_range > 0.0) {
        altitude_ = altitude_from_range(beam_range, state.att);
        altitude_valid_ = true;
        altitude_degraded_ = false;
    } else if (altitude_valid_) {
        altitude_degraded_ = true;  // hold last valid value
    }

    if (stop_requested_ && phase_ != MissionPhase::Land && phase_ != MissionPhase::Stopped &&
        phase_ != MissionPhase::Done) {
        if (phase_ == MissionPhase::Preflight) {
            transition(MissionPhase::Stopped, clock_, "stop while grounded");
        } else {
            land_target_z_ = altitude_;
            transition(MissionPhase::Land, clock_, "stop override, landing in place");
        }
    }

    MissionCommand cmd;
    cmd.phase = phase_;
    cmd.psi_ref = state.att.yaw;

    switch (phase_) {
        case MissionPhase::Preflight: {
            if (lidar_seen_ && depth_seen_ && beam_seen_ && altitude_valid_) {
                takeoff_position_ = state.p;
                takeoff_ramp_ = altitude_;
                settle_clock_ = 0.0;
                transition(MissionPhase::Takeoff, clock_, "pre-flight checks passed");
            }
            break;
        }
        case MissionPhase::Takeoff: {
            takeoff_ramp_ = std::min(takeoff_ramp_ + params_.takeoff_rate * dt,
                                     params_.altitude_setpoint);
            cmd.position_active = true;
            cmd.wp_body = {0.0, 0.0, takeoff_ramp_ - altitude_};
            cmd.yaw_mode = YawMode::Angle;
            cmd.psi_ref = state.att.yaw;
            if (std::abs(altitude_ - params_.altitude_setpoint) <= params_.altitude_tolerance) {
                settle_clock_ += dt;
                if (settle_clock_ >= params_.hover_settle) {
                    crumbs_.clear();
                    crumbs_.push_back({state.p, state.att.yaw});
                    last_crumb_anchor_ = state.p;
                    travel_since_crumb_ = 0.0;
                    has_last_position_ = false;
                    explore_deadline_ = clock_ + params_.t_reference;
                    transition(MissionPhase::Explore, clock_, "hover stabilized");
                }
            } else {
                settle_clock_ = 0.0;
            }
            break;
        }
        case MissionPhase::Explore: {
            if (has_last_position_) {
                travel_since_crumb_ += (state.p - last_position_).norm();
            }
            last_position_ = state.p;
            has_last_position_ = true;
            if (travel_since_crumb_ >= params_.crumb_spacing) {
                crumbs_.push_back({state.p, state.att.yaw});
                travel_since_crumb_ = 0.0;
                events_.push_back({clock_, "breadcrumb " + std::to_string(crumbs_.size())});
            }

            cmd.position_active = true;
            cmd.apf_active = true;
            cmd.dphr_active = true;
            cmd.wp_body = explore_waypoint(altitude_, params_.altitude_setpoint,
                                           params_.carrot_distance);
            cmd.yaw_mode = YawMode::Rate;
            cmd.yaw_rate_ref = heading.yaw_rate_ref;

            if (clock_ > explore_deadline_) {
                return_yaw_ref_ = wrap_angle(state.att.yaw + M_PI);
                turnaround_active_ = true;
                transition(MissionPhase::Return, clock_, "mission timer expired");
                cmd.phase = phase_;
                cmd.yaw_mode = YawMode::Angle;
                cmd.psi_ref = return_yaw_ref_;
                cmd.dphr_active = false;
            }
            break;
        }
        case MissionPhase::Return: {
            // The last crumb is the take-off hover point; approach it tighter
            // so landing ends close to the start.
            while (!crumbs_.empty() &&
                   (state.p - crumbs_.back().position).norm() <=
                       (crumbs_.size() == 1 ? std::min(0.6, params_.arrival_radius)
                                            : params_.arrival_radius)) {
                crumbs_.pop_back();
            }
            if (crumbs_.empty()) {
                land_target_z_ = altitude_;
                transition(MissionPhase::Land, clock_, "breadcrumbs exhausted");
                cmd.phase = phase_;
                cmd.position_active = true;
                cmd.wp_body = Vec3::Zero();
                cmd.yaw_mode = YawMode::Angle;
                cmd.psi_ref = state.att.yaw;
                break;
            }
            const Breadcrumb& target = crumbs_.back();
            cmd.position_active = true;
            cmd.apf_active = true;
            cmd.wp_body = world_to_body(target.position, state.p, state.att.yaw);
            cmd.yaw_mode = YawMode::Angle;
            if (turnaround_active_) {
                cmd.psi_ref = return_yaw_ref_;
                if (std::abs(wrap_angle(state.att.yaw - return_yaw_ref_)) < 0.3) {
                    turnaround_active_ = false;
                }
            } else {
                const Vec3 delta = target.position - state.p;
                if (delta.head<2>().norm() > 0.5) {
                    cmd.psi_ref = std::atan2(delta.y(), delta.x());
                } else {
                    cmd.psi_ref = state.att.yaw;
                }
            }
            break;
        }
        case MissionPhase::Land: {
            land_target_z_ = std::max(land_target_z_ - params_.land_rate * dt, 0.0);
            cmd.position_active = true;
            cmd.wp_body = {0.0, 0.0, land_target_z_ - altitude_};
            cmd.yaw_mode = YawMode::Angle;
            cmd.psi_ref = state.att.yaw;
            if (altitude_ <= params_.touchdown_height) {
                transition(stop_requested_ ? MissionPhase::Stopped : MissionPhase::Done,
                           clock_, "touchdown");
                cmd.phase = phase_;
                cmd.position_active = false;
            }
            break;
        }
        case MissionPhase::Done:
        case MissionPhase::Stopped:
            break;
    }
    return cmd;
}

}  // namespace tunnelpilot
