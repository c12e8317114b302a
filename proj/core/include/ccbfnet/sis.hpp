#pragma once

#include "ccbfnet/dynamics.hpp"
#include "ccbfnet/network.hpp"

namespace ccbfnet {

/// Networked SIS epidemic parameters. beta(i, j) is the infection pressure
/// node j exerts on node i (beta(i, i) is the node's own infection rate),
/// gamma the recovery rate, xbar the per-node cap on the infected fraction,
/// ubar the upper limit of the healing-rate boost.
struct SISParams {
    Mat beta;
    Vec gamma;
    Vec xbar;
    Vec ubar;

    int n() const { return static_cast<int>(gamma.size()); }
    void validate() const;
    NetworkGraph graph() const;
};

/// Scalar-state dynamics  xdot_i = -(gamma_i + u_i) x_i + (1 - x_i) sum_j beta_ij x_j,
/// i.e. drift -gamma_i x_i + (1 - x_i) sum_j beta_ij x_j and input map -x_i.
/// Includes analytic Jacobians and a [0, 1] state clamp.
DynamicsModel sis_dynamics(const SISParams& params);

/// h_i(x_i) = xbar_i - x_i.
BarrierSpec sis_barrier(const SISParams& params, NodeId i);

/// The 3-node reference experiment: homogeneous coupling with a dominant
/// self-infection rate, an endemic-inducing recovery rate, heterogeneous
/// safety caps, and a mid-run drop of the control limit.
struct ReferenceScenario {
    SISParams params;        // ubar holds the pre-failure limit
    Vec x0;
    double failure_time = 10.0;
    double ubar_before = 0.75;
    double ubar_after = 0.6;
    ClassKParams gains_large;  // conservative late-acting gains (variant A)
    ClassKParams gains_small;  // early-acting gains (variant B)
};

ReferenceScenario paper_scenario();

}  // namespace ccbfnet
