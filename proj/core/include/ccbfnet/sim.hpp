#pragma once

#include <string>
#include <vector>

#include "ccbfnet/dynamics.hpp"
#include "ccbfnet/negotiation.hpp"
#include "ccbfnet/network.hpp"
#include "ccbfnet/resilience.hpp"

namespace ccbfnet {

/// How the control derivative entering the capability is modeled.
struct DerivativePolicy {
    enum class Mode { zero, backward_difference, affine_decay };
    Mode mode = Mode::zero;
    double lambda = 0.0;  // affine_decay rate

    /// Affine realization for one node at the start of a control period.
    ControlDerivative make(int control_dim, const Vec& u_prev, double period) const;
};

/// A scheduled mid-run change: a new uniform control box for every node, or
/// a new compliance factor for one node.
struct Event {
    enum class Kind { control_box, compliance };
    double time = 0.0;
    Kind kind = Kind::control_box;
    double box_lo = 0.0;
    double box_hi = 0.0;
    NodeId node = 0;    // compliance only
    double rho = 1.0;   // compliance only, in [0, 1]
};

struct Scenario {
    double t_end = 20.0;
    double dt = 0.01;
    double control_period = 0.05;
    std::vector<Event> events;  // sorted by time
    std::vector<ClassKParams> gains;
    DerivativePolicy derivative_policy;
    NegotiationConfig negotiation;
    ControlBox box;  // bounds in force at t = 0
    /// Grid used for the per-period resilience-boundary record.
    double resilience_delta_nu = 0.01;
    double resilience_nu_max = 8.0;

    void validate(const NetworkGraph& graph) const;
};

/// One classical fourth-order Runge-Kutta update of the network dynamics
/// with controls held constant over the step.
NetworkState rk4_step(const DynamicsModel& model, const NetworkGraph& graph,
                      const NetworkState& state, const std::vector<Vec>& controls,
                      double dt, double t_now = 0.0);

struct ControlSelection {
    Vec u;
    /// No feasible action satisfied the first-order condition; u maximizes it
    /// instead.
    bool best_effort = false;
};

/// Second-order context for control selection: the node's capability terms
/// plus the assistance its incoming neighbors have committed to deliver.
struct SecondOrderCut {
    ControlDerivative deriv;
    double promised = 0.0;
};

/// Minimum-norm element of the allowed set that keeps the first-order
/// barrier condition nonnegative, or the best-effort maximizer when none
/// exists.
ControlSelection select_control(const AllowedActionSet& allowed, const LieBundle& bundle,
                                const ClassKParams& gains);

/// As above, but when the second-order condition (own capability plus
/// committed assistance >= 0) is satisfiable inside the first-order cut, the
/// selection moves from the minimum-norm point only as far along the segment
/// toward the capability maximizer as that condition requires. Holding the
/// second-order condition between samples is what keeps the first-order one
/// from eroding under zero-order hold.
ControlSelection select_control(const AllowedActionSet& allowed, const LieBundle& bundle,
                                const ClassKParams& gains, const SecondOrderCut& cut);

/// Per-node blend rho*committed + (1-rho)*selfish.
std::vector<Vec> apply_noncompliance(const std::vector<Vec>& committed,
                                     const std::vector<Vec>& selfish,
                                     const std::vector<double>& rho);

/// One recorded instant. Negotiation-derived fields hold the values of the
/// control period the instant falls in; barrier fields are recomputed at the
/// instant's state with the held controls.
struct TrajectorySample {
    double t = 0.0;
    std::vector<Vec> state;
    std::vector<Vec> control;
    std::vector<double> h;
    std::vector<double> psi1;
    std::vector<double> psi2;
    std::vector<double> deficit;
    std::vector<double> e;
    std::vector<double> epsilon;
    std::vector<Vec> lo;
    std::vector<Vec> hi;
    std::vector<std::map<NodeId, double>> commitments;  // incoming, per node
};

struct ResilienceSample {
    double t = 0.0;
    std::vector<ResilienceReport> per_node;
};

struct Trajectory {
    enum class Status { ok, aborted_infeasible, aborted_blowup };

    std::vector<TrajectorySample> samples;
    std::vector<ResilienceSample> resilience;
    Status status = Status::ok;
    std::string diagnostic;
    int clamp_events = 0;
    double max_clamp_excursion = 0.0;
    int negotiation_failures = 0;  // periods whose negotiation did not converge

    bool ok() const { return status == Status::ok; }
};

/// Closed loop: at every control period apply due events, rebuild Lie
/// bundles, negotiate, select and blend controls, record resilience; between
/// periods integrate with rk4_step under zero-order hold. Aborts with a
/// partial trajectory on integration blowup or an empty allowed set.
Trajectory run(const NetworkGraph& graph, const DynamicsModel& model,
               const std::vector<BarrierSpec>& barriers, const Scenario& scenario,
               const NetworkState& x0);

}  // namespace ccbfnet
