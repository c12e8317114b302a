#pragma once

#include <utility>
#include <vector>

#include "ccbfnet/types.hpp"

namespace ccbfnet {

/// Directed influence topology. An edge (i, j) means node j's state enters
/// node i's dynamics, so j is an incoming neighbor of i and i is an outgoing
/// neighbor of j. Self-loops are excluded. Immutable after construction;
/// safe for unsynchronized concurrent reads.
class NetworkGraph {
public:
    NetworkGraph(int n,
                 const std::vector<std::pair<NodeId, NodeId>>& edges,
                 std::vector<int> state_dims,
                 std::vector<int> control_dims);

    /// Homogeneous all-to-all topology (every ordered pair i != j).
    static NetworkGraph fully_connected(int n, int state_dim = 1, int control_dim = 1);

    /// Edges from a coupling matrix: (i, j) is an edge iff i != j and
    /// coupling(i, j) != 0. All nodes scalar-state, scalar-control.
    static NetworkGraph from_coupling(const Mat& coupling);

    int size() const { return n_; }
    int state_dim(NodeId i) const;
    int control_dim(NodeId i) const;
    int total_state_dim() const { return total_state_dim_; }
    int state_offset(NodeId i) const;

    /// { j != i : (i, j) in E }, ascending.
    const std::vector<NodeId>& in_neighbors(NodeId i) const;
    /// { k != i : (k, i) in E }, ascending.
    const std::vector<NodeId>& out_neighbors(NodeId i) const;
    /// in_neighbors(i) ∪ out_neighbors(i), ascending.
    std::vector<NodeId> neighbors(NodeId i) const;

    bool has_edge(NodeId i, NodeId j) const;

private:
    void check_node(NodeId i) const;

    int n_ = 0;
    int total_state_dim_ = 0;
    std::vector<int> state_dims_;
    std::vector<int> control_dims_;
    std::vector<int> state_offsets_;
    std::vector<std::vector<NodeId>> in_;
    std::vector<std::vector<NodeId>> out_;
};

/// Per-node state vectors stacked in ascending node order.
class NetworkState {
public:
    NetworkState() = default;
    NetworkState(const NetworkGraph& graph, Vec flat);
    static NetworkState zero(const NetworkGraph& graph);

    int total_dim() const { return static_cast<int>(data_.size()); }
    int nodes() const { return static_cast<int>(dims_.size()); }

    Eigen::VectorBlock<const Vec> node(NodeId i) const;
    Eigen::VectorBlock<Vec> node(NodeId i);

    const Vec& flat() const { return data_; }
    Vec& flat() { return data_; }

private:
    std::vector<int> dims_;
    std::vector<int> offsets_;
    Vec data_;
};

/// Per-node componentwise control bounds lo <= u <= hi (a closed box).
struct ControlBox {
    std::vector<Vec> lo;
    std::vector<Vec> hi;

    static ControlBox uniform(const NetworkGraph& graph, double lo, double hi);
    void validate(const NetworkGraph& graph) const;
};

/// Node ids whose states appear in the stacked neighborhood vector, in
/// stacking order: i first, then incoming neighbors ascending, then (for
/// hops = 2) incoming neighbors of those, first occurrence kept, never
/// repeating i or an id already present.
std::vector<NodeId> neighborhood_support(const NetworkGraph& graph, NodeId i, int hops);

/// Stacked neighborhood state (x_i, x_in-neighbors[, second hop]).
Vec gather_neighborhood(const NetworkState& state, const NetworkGraph& graph,
                        NodeId i, int hops);

}  // namespace ccbfnet
