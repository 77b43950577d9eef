/**
 * @file nmpc.hpp
 * @brief Reference-tracking nonlinear MPC on the 8-state yaw-compensated
 *        model: quadratic state/input/input-change cost, hard input bounds by
 *        projection, roll/pitch rate constraints by quadratic penalty.
 */

#pragma once

#include <vector>

#include "tunnelpilot/dynamics.hpp"

namespace tunnelpilot {

using NmpcVec = Eigen::Matrix<double, 8, 1>;

/// Eight states: position, velocity, roll, pitch — in the yaw-compensated frame.
struct NmpcState {
    Vec3 p{Vec3::Zero()};
    Vec3 v{Vec3::Zero()};
    double roll{0.0};
    double pitch{0.0};

    NmpcVec vec() const;
    static NmpcState from_vec(const NmpcVec& x);
};

/// Diagonal weights for Eq.-style quadratic cost plus the adaptive position
/// weight range.
struct NmpcWeights {
    NmpcVec q_x{(NmpcVec() << 6, 6, 6, 2, 2, 2, 1, 1).finished()};
    Vec3 q_u{2, 2, 2};       // thrust, roll_ref, pitch_ref
    Vec3 q_du{5, 5, 5};
    double q_p_min{2.0};
    double q_p_max{6.0};
    double c{3.0};           // adaptation tuning constant

    /// Overwrite the three position entries of q_x.
    void set_position_weight(double q_p);
};

/// Position weight as a function of the raw repulsive-force magnitude:
///   Q_p = Q_p_min + (Q_p_max - Q_p_min) / (1 + c*|F_r|)
double adapt_position_weights(const NmpcWeights& weights, double repulsive_force_magnitude);

struct InputBounds {
    Vec3 u_min{0.0, -0.7, -0.7};            // thrust m/s^2, roll rad, pitch rad
    Vec3 u_max{1.5 * 9.81, 0.7, 0.7};
    double d_roll_max{0.2};                  // per-step reference change limits
    double d_pitch_max{0.2};
};

struct NmpcConfig {
    int horizon{20};
    double dt{0.05};
    int max_outer_iters{10};
    int max_inner_iters{40};
    double penalty_initial{4000.0};
    double rate_tolerance{1e-3};   // rad, accepted rate-constraint violation
    double step_tolerance{2e-7};   // inner-loop termination on input change
};

struct NmpcSolution {
    ControlCommand command;               // first input of the optimal sequence
    std::vector<NmpcState> predicted;     // x_0..x_N
    std::vector<Vec3> inputs;             // u_0..u_{N-1}
    double cost{0.0};                     // tracking cost (without penalty)
    bool degraded{false};                 // solver hit the iteration budget
    int outer_iterations{0};
    int inner_iterations{0};
};

/// One NMPC tracking problem instance. Exposed separately from the solver so
/// tests can evaluate the cost and its gradient directly.
class NmpcProblem {
public:
    NmpcProblem(const NmpcState& current, const NmpcState& reference, const Vec3& u_prev,
                const NmpcWeights& weights, const InputBounds& bounds,
                const PlantParams& model, const NmpcConfig& config);

    int horizon() const { return config_.horizon; }
    const Vec3& hover_input() const { return u_ref_; }
    const InputBounds& bounds() const { return bounds_; }

    /// One RK4 step of the prediction model.
    NmpcVec step(const NmpcVec& x, const Vec3& u) const;
    /// Same step with state/input Jacobians of the discrete map.
    NmpcVec step_with_jacobians(const NmpcVec& x, const Vec3& u,
                                Eigen::Matrix<double, 8, 8>& A,
                                Eigen::Matrix<double, 8, 3>& B) const;

    std::vector<NmpcVec> rollout(const std::vector<Vec3>& inputs) const;

    /// Tracking cost only (state + input + input-change terms).
    double cost(const std::vector<Vec3>& inputs) const;
    /// Analytic gradient of cost() via the adjoint recursion.
    double cost_and_gradient(const std::vector<Vec3>& inputs, std::vector<Vec3>& grad) const;
    /// cost() plus the quadratic rate-constraint penalty weighted by mu.
    double penalized_cost_and_gradient(const std::vector<Vec3>& inputs, double mu,
                                       std::vector<Vec3>& grad) const;

    double max_rate_violation(const std::vector<Vec3>& inputs) const;
    Vec3 project(const Vec3& u) const;

private:
    NmpcVec x0_;
    NmpcVec x_ref_;
    Vec3 u_prev_;
    Vec3 u_ref_;
    NmpcWeights weights_;
    InputBounds bounds_;
    PlantParams model_;
    NmpcConfig config_;
};

/// Warm-started projected-gradient solver with a penalty outer loop for the
/// rate constraints. One instance per vehicle.
class NmpcSolver {
public:
    explicit NmpcSolver(const NmpcConfig& config = {}, const PlantParams& model = {});

    const NmpcConfig& config() const { return config_; }

    NmpcSolution solve(const NmpcState& current, const NmpcState& reference,
                       const ControlCommand& u_prev, const NmpcWeights& weights,
                       const InputBounds& bounds);

    void reset_warm_start() { warm_.clear(); }

private:
    NmpcConfig config_;
    PlantParams model_;
    std::vector<Vec3> warm_;
};

}  // namespace tunnelpilot
