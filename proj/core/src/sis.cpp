#include "ccbfnet/sis.hpp"

#include <cmath>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

void SISParams::validate() const {
    const int nn = n();
    if (nn <= 0) throw ArgumentError("SISParams: empty parameter set");
    if (beta.rows() != nn || beta.cols() != nn)
        throw DimensionError("SISParams: beta must be n x n");
    if (xbar.size() != nn || ubar.size() != nn)
        throw DimensionError("SISParams: xbar/ubar must have one entry per node");
    if ((beta.array() < 0.0).any())
        throw ArgumentError("SISParams: beta entries must be nonnegative");
    for (int i = 0; i < nn; ++i) {
        if (gamma(i) <= 0.0) throw ArgumentError("SISParams: gamma must be positive");
        if (xbar(i) <= 0.0 || xbar(i) > 1.0)
            throw ArgumentError("SISParams: xbar must lie in (0, 1]");
        if (ubar(i) < 0.0) throw ArgumentError("SISParams: ubar must be nonnegative");
    }
}

NetworkGraph SISParams::graph() const {
    validate();
    return NetworkGraph::from_coupling(beta);
}

DynamicsModel sis_dynamics(const SISParams& params) {
    params.validate();
    DynamicsModel model;
    model.drift = [params](const NetworkState& state, NodeId i) {
        const double xi = state.node(i)(0);
        double pressure = 0.0;
        for (int j = 0; j < params.n(); ++j)
            pressure += params.beta(i, j) * state.node(j)(0);
        Vec f(1);
        f(0) = -params.gamma(i) * xi + (1.0 - xi) * pressure;
        return f;
    };
    model.input_map = [](const NetworkState& state, NodeId i) {
        Mat g(1, 1);
        g(0, 0) = -state.node(i)(0);
        return g;
    };
    model.drift_jacobian = [params](const NetworkState& state, NodeId i, NodeId j) {
        Mat jac(1, 1);
        if (i == j) {
            double pressure = 0.0;
            for (int k = 0; k < params.n(); ++k)
                pressure += params.beta(i, k) * state.node(k)(0);
            jac(0, 0) = -params.gamma(i) - pressure +
                        (1.0 - state.node(i)(0)) * params.beta(i, i);
        } else {
            jac(0, 0) = (1.0 - state.node(i)(0)) * params.beta(i, j);
        }
        return jac;
    };
    model.input_map_jacobian = [](const NetworkState&, NodeId) {
        return std::vector<Mat>{Mat::Constant(1, 1, -1.0)};
    };
    model.clamp_state = [](Vec& x, NodeId) {
        const double raw = x(0);
        x(0) = std::min(1.0, std::max(0.0, raw));
        return std::abs(raw - x(0));
    };
    return model;
}

BarrierSpec sis_barrier(const SISParams& params, NodeId i) {
    params.validate();
    if (i < 0 || i >= params.n()) throw ArgumentError("sis_barrier: unknown node id");
    BarrierSpec spec;
    const double cap = params.xbar(i);
    spec.threshold = cap;
    spec.value = [cap](const Vec& x) { return cap - x(0); };
    spec.gradient = [](const Vec&) { return RowVec::Constant(1, -1.0); };
    spec.hessian = [](const Vec&) { return Mat::Zero(1, 1); };
    return spec;
}

ReferenceScenario paper_scenario() {
    ReferenceScenario s;
    const int n = 3;
    s.params.beta = Mat::Constant(n, n, 0.25);
    s.params.beta.diagonal().setConstant(0.5);
    s.params.gamma = Vec::Constant(n, 0.3);
    s.params.xbar = Vec(n);
    s.params.xbar << 0.1, 0.12, 0.18;
    s.params.ubar = Vec::Constant(n, 0.75);
    s.x0 = Vec(n);
    s.x0 << 0.04, 0.01, 0.02;
    s.failure_time = 10.0;
    s.ubar_before = 0.75;
    s.ubar_after = 0.6;
    s.gains_large = ClassKParams{10.0, 1.0};
    s.gains_small = ClassKParams{0.3, 0.3};
    return s;
}

}  // namespace ccbfnet
