#pragma once

#include <map>
#include <string>

#include "ccbfnet/dynamics.hpp"
#include "ccbfnet/network.hpp"

namespace ccbfnet {

/// Every Lie-derivative term of one node's barrier that the second-order
/// chain needs, evaluated at one network state. cross_f and cross_g are
/// keyed by incoming-neighbor id; cross_g holds the coupling gains a_ij
/// through which neighbor controls enter the second derivative.
struct LieBundle {
    NodeId node = 0;
    double h = 0.0;          // h_i(x_i)
    double lf_h = 0.0;       // L_f h
    RowVec lg_h;             // L_g h, 1 x M_i
    double lf2_h = 0.0;      // L_f^2 h
    Mat lg2_h;               // L_g^2 h, M_i x M_i
    RowVec lf_lg_h;          // L_f L_g h (as a row), 1 x M_i
    RowVec lg_lf_h;          // L_g L_f h, 1 x M_i
    std::map<NodeId, double> cross_f;  // j -> L_{f_j} L_{f_i} h_i
    std::map<NodeId, RowVec> cross_g;  // j -> a_ij, 1 x M_j

    int control_dim() const { return static_cast<int>(lg_h.size()); }
};

/// Evaluate all first- and second-order Lie terms for node i at the current
/// state. Throws NumericalDomainError naming the term if any entry is
/// non-finite.
LieBundle lie_bundle(const DynamicsModel& model, const BarrierSpec& barrier,
                     const NetworkGraph& graph, const NetworkState& state,
                     NodeId i);

/// a_ij for incoming neighbor j; ArgumentError if j is not one.
const RowVec& coupling_gain(const LieBundle& bundle, NodeId j);

/// First barrier-chain function: hdot_i + eta_i * h_i.
double psi1(const LieBundle& bundle, const ClassKParams& params, const Vec& u_i);

/// Own-capability terms of the second barrier-chain function (everything in
/// psi2 except the neighbor-control couplings). d_of_u is the supplied value
/// of the control-derivative model at u_i.
double capability(const LieBundle& bundle, const ClassKParams& params,
                  const Vec& u_i, const Vec& d_of_u);

/// psi2 assembled directly from the second-derivative expansion:
/// hddot + eta*hdot + kappa*(hdot + eta*h), with neighbor controls u_j.
double psi2_direct(const LieBundle& bundle, const ClassKParams& params,
                   const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors,
                   const Vec& d_of_u);

/// psi2 assembled from the grouped decomposition sum_j a_ij u_j + c_i.
double psi2_decomposed(const LieBundle& bundle, const ClassKParams& params,
                       const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors,
                       const Vec& d_of_u);

/// Per-term maximum relative error of the analytic bundle against nested
/// central finite differences of h along the flow.
struct AuditReport {
    double step = 0.0;
    bool cancellation_warning = false;
    std::map<std::string, double> max_rel_error;

    double worst() const;
};

/// Audit every LieBundle entry for node i at the given state against
/// derivative-free finite differences. step > 0 required; a step small
/// enough that rounding noise dominates the nested differences sets
/// cancellation_warning.
AuditReport finite_difference_audit(const DynamicsModel& model,
                                    const BarrierSpec& barrier,
                                    const NetworkGraph& graph,
                                    const NetworkState& state, NodeId i,
                                    double step);

}  // namespace ccbfnet
