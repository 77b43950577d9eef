/**
 * @file dynamics.hpp
 * @brief Simulated MAV plant: point-mass translational dynamics under
 *        thrust/attitude commands, first-order inner attitude loop at 100 Hz,
 *        decoupled yaw PD.
 */

#pragma once

#include "tunnelpilot/geometry.hpp"

namespace tunnelpilot {

/// Full vehicle state: position/velocity in world frame, attitude, body rates.
struct VehicleState {
    Vec3 p{Vec3::Zero()};
    Vec3 v{Vec3::Zero()};
    Attitude att;
    Vec3 omega{Vec3::Zero()};

    bool finite() const;
};

/// Commands accepted by the inner attitude loop: mass-normalized collective
/// thrust, roll/pitch references and a yaw-rate reference.
struct ControlCommand {
    double thrust{0.0};      // m/s^2, >= 0
    double roll_ref{0.0};    // rad
    double pitch_ref{0.0};   // rad
    double yaw_rate_ref{0.0};  // rad/s

    /// Normalized throttle, linear map with 0.5 at hover.
    double throttle(double gravity = 9.81) const;
};

struct PlantParams {
    double gravity{9.81};
    double attitude_tau{0.15};  // roll/pitch first-order lag
    double attitude_gain{1.0};
    Vec3 drag{0.1, 0.1, 0.2};   // linear drag coefficients, 1/s
    double yaw_rate_tau{0.15};  // yaw-rate inner lag
};

struct YawPdParams {
    double kp{1.0};
    double kd{0.1};
    double max_rate{0.75};  // rad/s
};

/// One RK4 step of the plant. dt must be in (0, 0.02]; the nominal inner-loop
/// rate is 100 Hz with outer-loop commands zero-order-held.
/// Throws std::invalid_argument on a non-finite input state.
VehicleState step_plant(const VehicleState& state, const ControlCommand& cmd,
                        double dt, const PlantParams& params);

/// Decoupled yaw PD: rate = kp*wrap(psi_ref - psi) - kd*omega_z, clamped.
double yaw_pd(const VehicleState& state, double psi_ref, const YawPdParams& params);

}  // namespace tunnelpilot
