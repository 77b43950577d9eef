#include "tunnelpilot/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace tunnelpilot {

bool VehicleState::finite() const {
    return p.allFinite() && v.allFinite() && omega.allFinite() &&
           std::isfinite(att.roll) && std::isfinite(att.pitch) && std::isfinite(att.yaw);
}

double ControlCommand::throttle(double gravity) const {
    const double u = thrust / (2.0 * gravity);
    return std::clamp(u, 0.0, 1.0);
}

namespace {

// Integrated state: p(3), v(3), roll, pitch, yaw, yaw_rate.
using PlantVec = Eigen::Matrix<double, 10, 1>;

PlantVec pack(const VehicleState& s) {
    PlantVec x;
    x << s.p, s.v, s.att.roll, s.att.pitch, s.att.yaw, s.omega.z();
    return x;
}

PlantVec derivative(const PlantVec& x, const ControlCommand& cmd, const PlantParams& prm) {
    const double roll = x(6), pitch = x(7), yaw = x(8), yaw_rate = x(9);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);

    // Third column of Rz(yaw)*Ry(pitch)*Rx(roll): thrust direction in world.
    const Vec3 thrust_dir{cy * sp * cr + sy * sr,
                          sy * sp * cr - cy * sr,
                          cp * cr};
    const Vec3 v = x.segment<3>(3);

    PlantVec dx;
    dx.segment<3>(0) = v;
    dx.segment<3>(3) = cmd.thrust * thrust_dir - Vec3{0, 0, prm.gravity} -
                       prm.drag.cwiseProduct(v);
    dx(6) = (prm.attitude_gain * cmd.roll_ref - roll) / prm.attitude_tau;
    dx(7) = (prm.attitude_gain * cmd.pitch_ref - pitch) / prm.attitude_tau;
    dx(8) = yaw_rate;
    dx(9) = (cmd.yaw_rate_ref - yaw_rate) / prm.yaw_rate_tau;
    return dx;
}

}  // namespace

VehicleState step_plant(const VehicleState& state, const ControlCommand& cmd,
                        double dt, const PlantParams& params) {
    if (!state.finite()) {
        throw std::invalid_argument("step_plant: non-finite input state");
    }
    if (!(dt > 0.0 && dt <= 0.02)) {
        throw std::invalid_argument("step_plant: dt outside (0, 0.02]");
    }

    const PlantVec x0 = pack(state);
    const PlantVec k1 = derivative(x0, cmd, params);
    const PlantVec k2 = derivative(x0 + 0.5 * dt * k1, cmd, params);
    const PlantVec k3 = derivative(x0 + 0.5 * dt * k2, cmd, params);
    const PlantVec k4 = derivative(x0 + dt * k3, cmd, params);
    const PlantVec x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    VehicleState next;
    next.p = x1.segment<3>(0);
    next.v = x1.segment<3>(3);
    next.att.roll = x1(6);
    next.att.pitch = x1(7);
    next.att.yaw = wrap_angle(x1(8));
    // Roll/pitch rates follow directly from the first-order inner loop.
    next.omega.x() = (params.attitude_gain * cmd.roll_ref - next.att.roll) / params.attitude_tau;
    next.omega.y() = (params.attitude_gain * cmd.pitch_ref - next.att.pitch) / params.attitude_tau;
    next.omega.z() = x1(9);
    return next;
}

double yaw_pd(const VehicleState& state, double psi_ref, const YawPdParams& params) {
    const double err = wrap_angle(psi_ref - state.att.yaw);
    const double rate = params.kp * err - params.kd * state.omega.z();
    return std::clamp(rate, -params.max_rate, params.max_rate);
}

}  // namespace tunnelpilot
