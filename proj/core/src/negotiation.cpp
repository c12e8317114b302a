#include "ccbfnet/negotiation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

double compute_deficit(double capability_in_box, double outgoing_burden,
                       const CommitmentLedger& ledger) {
    double delta = capability_in_box - outgoing_burden;
    for (const auto& [j, promise] : ledger.incoming) delta += promise;
    return delta;
}

RequestPlan make_requests(double deficit, const std::map<NodeId, double>& headroom,
                          double margin) {
    if (deficit >= 0.0)
        throw ArgumentError("make_requests: only defined for a negative deficit");
    RequestPlan plan;
    const double need = -deficit + margin;
    double total = 0.0;
    for (const auto& [j, h] : headroom) total += std::max(h, 0.0);
    if (total <= 0.0) {
        for (const auto& [j, h] : headroom) plan.requests[j] = 0.0;
        plan.infeasible = true;
        return plan;
    }
    for (const auto& [j, h] : headroom)
        plan.requests[j] = need * std::max(h, 0.0) / total;
    return plan;
}

double respond_to_request(double request, const RowVec& gain, double prior_promise,
                          double slack, AllowedActionSet& own_allowed,
                          int& halfspace_index) {
    if (request < 0.0) throw ArgumentError("respond_to_request: request must be nonnegative");
    if (gain.size() != own_allowed.dim())
        throw DimensionError("respond_to_request: gain length does not match action set");
    const double deliverable = maximize_linear(gain, own_allowed).value;
    // Grant what fits; never weaken an existing promise.
    const double total = std::max(prior_promise, std::min(prior_promise + request, deliverable));
    HalfSpace hs{gain, -total + slack};
    if (halfspace_index < 0)
        halfspace_index = own_allowed.add_halfspace(std::move(hs));
    else
        own_allowed.set_halfspace(halfspace_index, std::move(hs));
    return total;
}

namespace {

struct NodeEval {
    double cap_box = 0.0;      // full capability maximized over the plain box
    double cap_allowed = 0.0;  // full capability maximized over the allowed set
    double deficit = 0.0;
};

double full_capability_max(const NodeContext& node, const AllowedActionSet& set,
                           double nu) {
    const auto obj = QuadraticObjective::from_bundle(node.bundle, nu, node.deriv);
    const auto res = maximize_capability(obj, set);
    return capability(node.bundle, node.gains, res.u_star, node.deriv.eval(res.u_star));
}

}  // namespace

NegotiationOutcome run_collaboration(const NetworkGraph& graph,
                                     const std::vector<NodeContext>& nodes,
                                     const NegotiationConfig& config,
                                     const MessageSink& sink) {
    const int n = graph.size();
    if (static_cast<int>(nodes.size()) != n)
        throw DimensionError("run_collaboration: need one context per node");
    if (config.max_rounds < 1)
        throw ArgumentError("run_collaboration: max_rounds must be at least 1");

    NegotiationOutcome out;
    out.ledgers.assign(n, CommitmentLedger{});
    out.deficit.assign(n, 0.0);
    out.capability.assign(n, 0.0);
    out.allowed.reserve(n);
    for (int i = 0; i < n; ++i) {
        out.allowed.emplace_back(nodes[i].box_lo, nodes[i].box_hi);
        for (NodeId j : graph.in_neighbors(i)) {
            out.ledgers[i].incoming[j] = 0.0;
        }
        for (NodeId k : graph.out_neighbors(i)) {
            out.ledgers[i].outgoing[k] = 0.0;
            out.ledgers[i].slack[k] = config.commitment_slack;
        }
    }
    // Half-space index of each outgoing commitment (promiser node, receiver).
    std::vector<std::map<NodeId, int>> hs_index(n);

    auto evaluate = [&](int i) {
        NodeEval ev;
        const double nu = nodes[i].gains.nu();
        AllowedActionSet plain_box(nodes[i].box_lo, nodes[i].box_hi);
        ev.cap_box = full_capability_max(nodes[i], plain_box, nu);
        ev.cap_allowed = full_capability_max(nodes[i], out.allowed[i], nu);
        ev.deficit = compute_deficit(ev.cap_box, ev.cap_box - ev.cap_allowed,
                                     out.ledgers[i]);
        return ev;
    };

    std::vector<NodeEval> evals(n);
    for (int round = 1; round <= config.max_rounds; ++round) {
        out.rounds_used = round;
        out.locally_infeasible.clear();
        for (int i = 0; i < n; ++i) {
            out.ledgers[i].round = round;
            evals[i] = evaluate(i);
        }
        const bool all_satisfied = std::all_of(evals.begin(), evals.end(),
                                               [](const NodeEval& ev) { return ev.deficit >= 0.0; });
        if (all_satisfied) {
            out.converged = true;
            break;
        }

        // Request phase, from the round-start snapshot of allowed sets.
        std::vector<std::vector<std::pair<NodeId, double>>> inbox(n);  // receiver -> (sender, r)
        bool any_request = false;
        for (int i = 0; i < n; ++i) {
            if (evals[i].deficit >= 0.0) continue;
            std::map<NodeId, double> headroom;
            for (NodeId j : graph.in_neighbors(i)) {
                const RowVec& a_ij = nodes[i].bundle.cross_g.at(j);
                headroom[j] = maximize_linear(a_ij, out.allowed[j]).value -
                              out.ledgers[i].incoming.at(j);
            }
            if (headroom.empty()) {
                out.locally_infeasible.push_back(i);
                continue;
            }
            const auto plan =
                make_requests(evals[i].deficit, headroom, config.hysteresis_margin);
            if (plan.infeasible) out.locally_infeasible.push_back(i);
            for (const auto& [j, r] : plan.requests) {
                if (r <= 0.0) continue;
                inbox[j].emplace_back(i, r);
                any_request = true;
                if (sink) {
                    NegotiationMessage m;
                    m.round = round;
                    m.sender = i;
                    m.receiver = j;
                    m.kind = NegotiationMessage::Kind::request;
                    m.value = r;
                    sink(m);
                }
            }
        }
        if (!any_request) break;  // no progress possible this round

        // Response phase, receivers then senders in ascending id order.
        for (int j = 0; j < n; ++j) {
            std::sort(inbox[j].begin(), inbox[j].end());
            for (const auto& [i, r] : inbox[j]) {
                const RowVec& a_ij = nodes[i].bundle.cross_g.at(j);
                int& index = hs_index[j].try_emplace(i, -1).first->second;
                const double total = respond_to_request(
                    r, a_ij, out.ledgers[j].outgoing.at(i),
                    out.ledgers[j].slack.at(i), out.allowed[j], index);
                out.ledgers[j].outgoing[i] = total;
                out.ledgers[i].incoming[j] = total;
                if (sink) {
                    NegotiationMessage m;
                    m.round = round;
                    m.sender = j;
                    m.receiver = i;
                    m.kind = NegotiationMessage::Kind::commit;
                    m.value = total;
                    sink(m);
                }
                if (out.allowed[j].empty())
                    throw InfeasibleError(
                        "run_collaboration: allowed action set of node " +
                        std::to_string(j + 1) + " became empty");
            }
        }
    }

    // Final capabilities and deficits under the final ledgers.
    bool all_ok = true;
    for (int i = 0; i < n; ++i) {
        const auto ev = evaluate(i);
        out.capability[i] = ev.cap_allowed;
        out.deficit[i] = ev.deficit;
        all_ok = all_ok && ev.deficit >= 0.0;
    }
    out.converged = all_ok;
    return out;
}

std::string trace_json_line(const NegotiationMessage& msg) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "{\"round\":%d,\"sender\":%d,\"receiver\":%d,\"kind\":\"%s\",\"value\":%.17g}",
                  msg.round, msg.sender + 1, msg.receiver + 1,
                  msg.kind == NegotiationMessage::Kind::request ? "request" : "commit",
                  msg.value);
    return std::string(buf);
}

}  // namespace ccbfnet
