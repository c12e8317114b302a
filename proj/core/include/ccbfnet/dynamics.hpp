#pragma once

#include <functional>
#include <vector>

#include "ccbfnet/network.hpp"
#include "ccbfnet/types.hpp"

namespace ccbfnet {

/// Control-affine networked dynamics: per node,
///   xdot_i = drift_i(x_i, x_in-neighbors) + input_map_i(x_i) * u_i.
/// Callables take the full network state and the node id, read only the
/// blocks that node's dynamics depend on, and must be pure. Analytic
/// Jacobians are required; finite differences are used only to audit them.
struct DynamicsModel {
    /// f_i, length state_dim(i).
    std::function<Vec(const NetworkState&, NodeId)> drift;
    /// g_i, state_dim(i) x control_dim(i).
    std::function<Mat(const NetworkState&, NodeId)> input_map;
    /// d f_i / d x_j, state_dim(i) x state_dim(j). j == i or an incoming
    /// neighbor of i; for any other j the result is zero.
    std::function<Mat(const NetworkState&, NodeId i, NodeId j)> drift_jacobian;
    /// d g_i(:, m) / d x_i for each control column m, each state_dim(i) square.
    std::function<std::vector<Mat>(const NetworkState&, NodeId)> input_map_jacobian;
    /// Optional domain projection applied after each integration step.
    /// Returns the clamped per-node state and the excursion magnitude
    /// (0 when the state was already inside the domain).
    std::function<double(Vec&, NodeId)> clamp_state;
};

/// Node-level constraint h_i(x_i) >= 0 with analytic derivatives.
struct BarrierSpec {
    std::function<double(const Vec&)> value;
    std::function<RowVec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    /// Constraint threshold carried for reporting (for SIS: the infection cap).
    double threshold = 0.0;
};

/// Linear class-K gains for the barrier chain. nu is derived, never stored.
struct ClassKParams {
    double eta = 0.0;
    double kappa = 0.0;

    double nu() const { return eta + kappa; }
    void validate() const;
};

/// Worst relative mismatch between the model's analytic Jacobians and
/// central finite differences of drift/input_map at the given state.
/// `step` is the difference step (1e-5 by convention).
double jacobian_audit(const DynamicsModel& model, const NetworkGraph& graph,
                      const NetworkState& state, NodeId i, double step);

}  // namespace ccbfnet
