#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ccbfnet/allowed_set.hpp"
#include "ccbfnet/lie.hpp"
#include "ccbfnet/network.hpp"
#include "ccbfnet/optimizer.hpp"

namespace ccbfnet {

/// Per-node record of negotiated safety commitments, all in psi2 units
/// (barrier acceleration). `incoming[j]` is the assistance neighbor j has
/// promised to this node, `outgoing[k]` the assistance this node has promised
/// to k; promises are nonnegative. The half-space a commitment induces on the
/// promiser's action set is a_ki * u + (-promise + slack) >= 0.
struct CommitmentLedger {
    std::map<NodeId, double> incoming;
    std::map<NodeId, double> outgoing;
    std::map<NodeId, double> slack;
    int round = 0;
};

struct NegotiationMessage {
    enum class Kind { request, commit };
    int round = 0;
    NodeId sender = 0;
    NodeId receiver = 0;
    Kind kind = Kind::request;
    double value = 0.0;
};

using MessageSink = std::function<void(const NegotiationMessage&)>;

struct NegotiationConfig {
    int max_rounds = 50;
    /// Extra amount requested beyond the deficit, to damp oscillation near 0.
    double hysteresis_margin = 0.0;
    /// Relaxation delta applied to commitment half-spaces.
    double commitment_slack = 0.0;
};

/// Everything one node contributes to a negotiation at a fixed state.
struct NodeContext {
    LieBundle bundle;
    ClassKParams gains;
    Vec box_lo;
    Vec box_hi;
    ControlDerivative deriv;
};

struct NegotiationOutcome {
    std::vector<double> deficit;
    /// Max capability over the final allowed set (the value each node would
    /// broadcast next).
    std::vector<double> capability;
    std::vector<AllowedActionSet> allowed;
    std::vector<CommitmentLedger> ledgers;
    /// Nodes whose deficit was negative while every neighbor headroom was
    /// zero in the final round.
    std::vector<NodeId> locally_infeasible;
    int rounds_used = 0;
    bool converged = false;
};

/// Signed slack of the collaborative safety condition under current
/// commitments: capability over the plain box, minus the capability lost to
/// honoring outgoing commitments, plus the sum of incoming promises.
/// Nonnegative means the condition is satisfiable as committed.
double compute_deficit(double capability_in_box, double outgoing_burden,
                       const CommitmentLedger& ledger);

struct RequestPlan {
    std::map<NodeId, double> requests;
    bool infeasible = false;
};

/// Splits the uncovered deficit into per-neighbor requests proportional to
/// advertised headroom. All headrooms zero yields zero requests and the
/// infeasible flag.
RequestPlan make_requests(double deficit, const std::map<NodeId, double>& headroom,
                          double margin);

/// Grants as much of the incremental request as the responder's current
/// allowed set can deliver on top of its prior promise, and tightens (or
/// appends) the half-space that makes any subsequently chosen action honor
/// the new total. Returns the new total promise. `halfspace_index` is the
/// responder's half-space for this edge (-1 when none exists yet; updated).
double respond_to_request(double request, const RowVec& gain, double prior_promise,
                          double slack, AllowedActionSet& own_allowed,
                          int& halfspace_index);

/// Synchronous rounds of capability broadcast, deficit evaluation,
/// proportional requests and min-clamped commitments, with ascending-id
/// message ordering. Terminates when every deficit is nonnegative, when a
/// round makes no progress, or at max_rounds.
NegotiationOutcome run_collaboration(const NetworkGraph& graph,
                                     const std::vector<NodeContext>& nodes,
                                     const NegotiationConfig& config = {},
                                     const MessageSink& sink = {});

/// Serializes one message as a JSON object on a single line (1-based ids).
std::string trace_json_line(const NegotiationMessage& msg);

}  // namespace ccbfnet
