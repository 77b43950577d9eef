#include "tunnelpilot/nmpc.hpp"

#include <algorithm>
#include <cmath>

namespace tunnelpilot {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat83 = Eigen::Matrix<double, 8, 3>;

// Continuous-time 8-state model in the yaw-compensated frame:
//   p_dot = v
//   v_dot = T * (sin(th)cos(ph), -sin(ph), cos(th)cos(ph)) - g e_z - drag o v
//   ph_dot = (K*u_roll - ph) / tau,  th_dot = (K*u_pitch - th) / tau
NmpcVec continuous_dynamics(const NmpcVec& x, const Vec3& u, const PlantParams& prm) {
    const double roll = x(6), pitch = x(7);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const Vec3 thrust_dir{sp * cr, -sr, cp * cr};
    const Vec3 v = x.segment<3>(3);

    NmpcVec dx;
    dx.segment<3>(0) = v;
    dx.segment<3>(3) = u(0) * thrust_dir - Vec3{0, 0, prm.gravity} - prm.drag.cwiseProduct(v);
    dx(6) = (prm.attitude_gain * u(1) - roll) / prm.attitude_tau;
    dx(7) = (prm.attitude_gain * u(2) - pitch) / prm.attitude_tau;
    return dx;
}

void continuous_jacobians(const NmpcVec& x, const Vec3& u, const PlantParams& prm,
                          Mat8& jx, Mat83& ju) {
    const double roll = x(6), pitch = x(7);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double thrust = u(0);

    jx.setZero();
    jx.block<3, 3>(0, 3).setIdentity();
    jx(3, 3) = -prm.drag.x();
    jx(4, 4) = -prm.drag.y();
    jx(5, 5) = -prm.drag.z();
    // d v_dot / d roll
    jx(3, 6) = thrust * (-sp * sr);
    jx(4, 6) = thrust * (-cr);
    jx(5, 6) = thrust * (-cp * sr);
    // d v_dot / d pitch
    jx(3, 7) = thrust * (cp * cr);
    jx(5, 7) = thrust * (-sp * cr);
    jx(6, 6) = -1.0 / prm.attitude_tau;
    jx(7, 7) = -1.0 / prm.attitude_tau;

    ju.setZero();
    ju(3, 0) = sp * cr;
    ju(4, 0) = -sr;
    ju(5, 0) = cp * cr;
    ju(6, 1) = prm.attitude_gain / prm.attitude_tau;
    ju(7, 2) = prm.attitude_gain / prm.attitude_tau;
}

}  // namespace

NmpcVec NmpcState::vec() const {
    NmpcVec x;
    x << p, v, roll, pitch;
    return x;
}

NmpcState NmpcState::from_vec(const NmpcVec& x) {
    NmpcState s;
    s.p = x.segment<3>(0);
    s.v = x.segment<3>(3);
    s.roll = x(6);
    s.pitch = x(7);
    return s;
}

void NmpcWeights::set_position_weight(double q_p) {
    q_x(0) = q_p;
    q_x(1) = q_p;
    q_x(2) = q_p;
}

double adapt_position_weights(const NmpcWeights& weights, double repulsive_force_magnitude) {
    return weights.q_p_min +
           (weights.q_p_max - weights.q_p_min) / (1.0 + weights.c * repulsive_force_magnitude);
}

NmpcProblem::NmpcProblem(const NmpcState& current, const NmpcState& reference,
                         const Vec3& u_prev, const NmpcWeights& weights,
                         const InputBounds& bounds, const PlantParams& model,
                         const NmpcConfig& config)
    : x0_(current.vec()),
      x_ref_(reference.vec()),
      u_prev_(u_prev),
      u_ref_(model.gravity, 0.0, 0.0),
      weights_(weights),
      bounds_(bounds),
      model_(model),
      config_(config) {}

NmpcVec NmpcProblem::step(const NmpcVec& x, const Vec3& u) const {
    const double dt = config_.dt;
    const NmpcVec k1 = continuous_dynamics(x, u, model_);
    const NmpcVec k2 = continuous_dynamics(x + 0.5 * dt * k1, u, model_);
    const NmpcVec k3 = continuous_dynamics(x + 0.5 * dt * k2, u, model_);
    const NmpcVec k4 = continuous_dynamics(x + dt * k3, u, model_);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

NmpcVec NmpcProblem::step_with_jacobians(const NmpcVec& x, const Vec3& u,
                                         Eigen::Matrix<double, 8, 8>& A,
                                         Eigen::Matrix<double, 8, 3>& B) const {
    const double dt = config_.dt;
    Mat8 j1, j2, j3, j4;
    Mat83 g1, g2, g3, g4;

    const NmpcVec k1 = continuous_dynamics(x, u, model_);
    continuous_jacobians(x, u, model_, j1, g1);
    const NmpcVec x2 = x + 0.5 * dt * k1;
    const NmpcVec k2 = continuous_dynamics(x2, u, model_);
    continuous_jacobians(x2, u, model_, j2, g2);
    const NmpcVec x3 = x + 0.5 * dt * k2;
    const NmpcVec k3 = continuous_dynamics(x3, u, model_);
    continuous_jacobians(x3, u, model_, j3, g3);
    const NmpcVec x4 = x + dt * k3;
    const NmpcVec k4 = continuous_dynamics(x4, u, model_);
    continuous_jacobians(x4, u, model_, j4, g4);

    const Mat8 d1 = j1;
    const Mat8 d2 = j2 * (Mat8::Identity() + 0.5 * dt * d1);
    const Mat8 d3 = j3 * (Mat8::Identity() + 0.5 * dt * d2);
    const Mat8 d4 = j4 * (Mat8::Identity() + dt * d3);
    A = Mat8::Identity() + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);

    const Mat83 e1 = g1;
    const Mat83 e2 = j2 * (0.5 * dt * e1) + g2;
    const Mat83 e3 = j3 * (0.5 * dt * e2) + g3;
    const Mat83 e4 = j4 * (dt * e3) + g4;
    B = (dt / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);

    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<NmpcVec> NmpcProblem::rollout(const std::vector<Vec3>& inputs) const {
    std::vector<NmpcVec> states(inputs.size() + 1);
    states[0] = x0_;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        states[j + 1] = step(states[j], inputs[j]);
    }
    return states;
}

double NmpcProblem::cost(const std::vector<Vec3>& inputs) const {
    const std::vector<NmpcVec> states = rollout(inputs);
    double total = 0.0;
    for (std::size_t j = 1; j < states.size(); ++j) {
        const NmpcVec ex = x_ref_ - states[j];
        total += ex.dot(weights_.q_x.cwiseProduct(ex));
    }
    Vec3 prev = u_prev_;
    for (const Vec3& u : inputs) {
        const Vec3 eu = u_ref_ - u;
        const Vec3 du = u - prev;
        total += eu.dot(weights_.q_u.cwiseProduct(eu));
        total += du.dot(weights_.q_du.cwiseProduct(du));
        prev = u;
    }
    return total;
}

double NmpcProblem::cost_and_gradient(const std::vector<Vec3>& inputs,
                                      std::vector<Vec3>& grad) const {
    const int n = static_cast<int>(inputs.size());
    grad.assign(n, Vec3::Zero());

    std::vector<NmpcVec> states(n + 1);
    std::vector<Mat8> a_mats(n);
    std::vector<Mat83> b_mats(n);
    states[0] = x0_;
    for (int j = 0; j < n; ++j) {
        states[j + 1] = step_with_jacobians(states[j], inputs[j], a_mats[j], b_mats[j]);
    }

    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        const NmpcVec ex = x_ref_ - states[j];
        total += ex.dot(weights_.q_x.cwiseProduct(ex));
    }
    for (int j = 0; j < n; ++j) {
        const Vec3 eu = u_ref_ - inputs[j];
        const Vec3 du = inputs[j] - (j == 0 ? u_prev_ : inputs[j - 1]);
        total += eu.dot(weights_.q_u.cwiseProduct(eu));
        total += du.dot(weights_.q_du.cwiseProduct(du));
        grad[j] += -2.0 * weights_.q_u.cwiseProduct(eu) + 2.0 * weights_.q_du.cwiseProduct(du);
        if (j > 0) {
            grad[j - 1] -= 2.0 * weights_.q_du.cwiseProduct(du);
        }
    }

    // Adjoint sweep for the state terms.
    NmpcVec lambda = -2.0 * weights_.q_x.cwiseProduct(x_ref_ - states[n]);
    for (int j = n - 1; j >= 0; --j) {
        grad[j] += b_mats[j].transpose() * lambda;
        if (j > 0) {
            lambda = a_mats[j].transpose() * lambda -
                     2.0 * weights_.q_x.cwiseProduct(x_ref_ - states[j]);
        }
    }
    return total;
}

double NmpcProblem::penalized_cost_and_gradient(const std::vector<Vec3>& inputs, double mu,
                                                std::vector<Vec3>& grad) const {
    double total = cost_and_gradient(inputs, grad);
    const int n = static_cast<int>(inputs.size());
    const double limits[2] = {bounds_.d_roll_max, bounds_.d_pitch_max};
    for (int axis = 1; axis <= 2; ++axis) {
        const double limit = limits[axis - 1];
        for (int j = 0; j < n; ++j) {
            const double prev = (j == 0) ? u_prev_(axis) : inputs[j - 1](axis);
            const double delta = inputs[j](axis) - prev;
            const double excess = std::abs(delta) - limit;
            if (excess > 0.0) {
                total += mu * excess * excess;
                const double d = 2.0 * mu * excess * (delta >= 0.0 ? 1.0 : -1.0);
                grad[j](axis) += d;
                if (j > 0) {
                    grad[j - 1](axis) -= d;
                }
            }
        }
    }
    return total;
}

double NmpcProblem::max_rate_violation(const std::vector<Vec3>& inputs) const {
    double worst = 0.0;
    const double limits[2] = {bounds_.d_roll_max, bounds_.d_pitch_max};
    for (int axis = 1; axis <= 2; ++axis) {
        double prev = u_prev_(axis);
        for (const Vec3& u : inputs) {
            worst = std::max(worst, std::abs(u(axis) - prev) - limits[axis - 1]);
            prev = u(axis);
        }
    }
    return std::max(worst, 0.0);
}

Vec3 NmpcProblem::project(const Vec3& u) const {
    return u.cwiseMax(bounds_.u_min).cwiseMin(bounds_.u_max);
}

NmpcSolver::NmpcSolver(const NmpcConfig& config, const PlantParams& model)
    : config_(config), model_(model) {}

NmpcSolution NmpcSolver::solve(const NmpcState& current, const NmpcState& reference,
                               const ControlCommand& u_prev, const NmpcWeights& weights,
                               const InputBounds& bounds) {
    const Vec3 u_prev_vec{u_prev.thrust, u_prev.roll_ref, u_prev.pitch_ref};
    const NmpcProblem problem(current, reference, u_prev_vec, weights, bounds, model_, config_);
    const int n = config_.horizon;

    std::vector<Vec3> u(n);
    if (static_cast<int>(warm_.size()) == n) {
        for (int j = 0; j < n; ++j) {
            u[j] = problem.project(warm_[std::min(j + 1, n - 1)]);
        }
    } else {
        std::fill(u.begin(), u.end(), problem.hover_input());
    }

    std::vector<Vec3> grad(n), trial(n), prev_u(n), prev_grad(n);
    double mu = config_.penalty_initial;
    double alpha = 1e-3;
    bool rate_ok = false;
    int outer_used = 0;
    int inner_used = 0;

    auto penalized_cost = [&](const std::vector<Vec3>& seq, double mu_val) {
        double total = problem.cost(seq);
        const double limits[2] = {bounds.d_roll_max, bounds.d_pitch_max};
        for (int axis = 1; axis <= 2; ++axis) {
            double prev = u_prev_vec(axis);
            for (const Vec3& uu : seq) {
                const double excess = std::abs(uu(axis) - prev) - limits[axis - 1];
                if (excess > 0.0) {
                    total += mu_val * excess * excess;
                }
                prev = uu(axis);
            }
        }
        return total;
    };

    for (int outer = 0; outer < config_.max_outer_iters; ++outer) {
        ++outer_used;
        bool have_prev = false;
        for (int inner = 0; inner < config_.max_inner_iters; ++inner) {
            ++inner_used;
            const double j0 = problem.penalized_cost_and_gradient(u, mu, grad);
            if (!std::isfinite(j0)) {
                break;
            }

            // Barzilai-Borwein step estimate, safeguarded by Armijo backtracking.
            if (have_prev) {
                double ss = 0.0, sy = 0.0;
                for (int j = 0; j < n; ++j) {
                    const Vec3 s = u[j] - prev_u[j];
                    const Vec3 y = grad[j] - prev_grad[j];
                    ss += s.dot(s);
                    sy += s.dot(y);
                }
                if (sy > 1e-16) {
                    alpha = std::clamp(ss / sy, 1e-6, 1.0);
                }
            }
            prev_u = u;
            prev_grad = grad;
            have_prev = true;

            double step_norm = 0.0;
            double accepted_cost = j0;
            bool accepted = false;
            while (alpha > 1e-14) {
                double directional = 0.0;
                step_norm = 0.0;
                for (int j = 0; j < n; ++j) {
                    trial[j] = problem.project(u[j] - alpha * grad[j]);
                    const Vec3 d = trial[j] - u[j];
                    directional += grad[j].dot(d);
                    step_norm = std::max(step_norm, d.lpNorm<Eigen::Infinity>());
                }
                if (step_norm == 0.0) {
                    break;
                }
                const double j1 = penalized_cost(trial, mu);
                if (j1 <= j0 + 1e-4 * directional) {
                    accepted = true;
                    accepted_cost = j1;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                break;
            }
            u.swap(trial);
            if (step_norm < config_.step_tolerance ||
                std::abs(j0 - accepted_cost) <= 1e-12 * std::max(1.0, std::abs(j0))) {
                break;
            }
        }
        if (problem.max_rate_violation(u) <= config_.rate_tolerance) {
            rate_ok = true;
            break;
        }
        mu *= 2.0;
    }

    warm_ = u;

    NmpcSolution sol;
    sol.inputs = u;
    sol.cost = problem.cost(u);
    sol.degraded = !rate_ok;
    sol.outer_iterations = outer_used;
    sol.inner_iterations = inner_used;
    sol.command.thrust = u[0](0);
    sol.command.roll_ref = u[0](1);
    sol.command.pitch_ref = u[0](2);
    sol.command.yaw_rate_ref = 0.0;  // yaw handled by the decoupled PD channel
    const std::vector<NmpcVec> states = problem.rollout(u);
    sol.predicted.reserve(states.size());
    for (const NmpcVec& x : states) {
        sol.predicted.push_back(NmpcState::from_vec(x));
    }
    return sol;
}

}  // namespace tunnelpilot
