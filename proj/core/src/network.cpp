#include "ccbfnet/network.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

NetworkGraph::NetworkGraph(int n,
                           const std::vector<std::pair<NodeId, NodeId>>& edges,
                           std::vector<int> state_dims,
                           std::vector<int> control_dims)
    : n_(n), state_dims_(std::move(state_dims)), control_dims_(std::move(control_dims)) {
    if (n_ <= 0)
        throw ArgumentError("NetworkGraph: node count must be positive");
    if (static_cast<int>(state_dims_.size()) != n_ ||
        static_cast<int>(control_dims_.size()) != n_)
        throw DimensionError("NetworkGraph: dimension lists must have one entry per node");
    for (int i = 0; i < n_; ++i) {
        if (state_dims_[i] <= 0 || control_dims_[i] <= 0)
            throw ArgumentError("NetworkGraph: all node dimensions must be positive");
    }
    state_offsets_.resize(n_);
    total_state_dim_ = 0;
    for (int i = 0; i < n_; ++i) {
        state_offsets_[i] = total_state_dim_;
        total_state_dim_ += state_dims_[i];
    }

    std::vector<std::set<NodeId>> in_sets(n_), out_sets(n_);
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= n_ || j < 0 || j >= n_)
            throw ArgumentError("NetworkGraph: edge endpoint out of range");
        if (i == j)
            throw ArgumentError("NetworkGraph: self-loop edges are not allowed");
        in_sets[i].insert(j);
        out_sets[j].insert(i);
    }
    in_.resize(n_);
    out_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        in_[i].assign(in_sets[i].begin(), in_sets[i].end());
        out_[i].assign(out_sets[i].begin(), out_sets[i].end());
    }
}

NetworkGraph NetworkGraph::fully_connected(int n, int state_dim, int control_dim) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) edges.emplace_back(i, j);
    return NetworkGraph(n, edges, std::vector<int>(n, state_dim),
                        std::vector<int>(n, control_dim));
}

NetworkGraph NetworkGraph::from_coupling(const Mat& coupling) {
    if (coupling.rows() != coupling.cols())
        throw DimensionError("NetworkGraph: coupling matrix must be square");
    const int n = static_cast<int>(coupling.rows());
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && coupling(i, j) != 0.0) edges.emplace_back(i, j);
    return NetworkGraph(n, edges, std::vector<int>(n, 1), std::vector<int>(n, 1));
}

void NetworkGraph::check_node(NodeId i) const {
    if (i < 0 || i >= n_)
        throw ArgumentError("NetworkGraph: unknown node id " + std::to_string(i));
}

int NetworkGraph::state_dim(NodeId i) const {
    check_node(i);
    return state_dims_[i];
}

int NetworkGraph::control_dim(NodeId i) const {
    check_node(i);
    return control_dims_[i];
}

int NetworkGraph::state_offset(NodeId i) const {
    check_node(i);
    return state_offsets_[i];
}

const std::vector<NodeId>& NetworkGraph::in_neighbors(NodeId i) const {
    check_node(i);
    return in_[i];
}

const std::vector<NodeId>& NetworkGraph::out_neighbors(NodeId i) const {
    check_node(i);
    return out_[i];
}

std::vector<NodeId> NetworkGraph::neighbors(NodeId i) const {
    check_node(i);
    std::vector<NodeId> u;
    std::set_union(in_[i].begin(), in_[i].end(), out_[i].begin(), out_[i].end(),
                   std::back_inserter(u));
    return u;
}

bool NetworkGraph::has_edge(NodeId i, NodeId j) const {
    check_node(i);
    check_node(j);
    return std::binary_search(in_[i].begin(), in_[i].end(), j);
}

NetworkState::NetworkState(const NetworkGraph& graph, Vec flat) : data_(std::move(flat)) {
    if (static_cast<int>(data_.size()) != graph.total_state_dim())
        throw DimensionError("NetworkState: flat vector length does not match graph");
    dims_.resize(graph.size());
    offsets_.resize(graph.size());
    for (int i = 0; i < graph.size(); ++i) {
        dims_[i] = graph.state_dim(i);
        offsets_[i] = graph.state_offset(i);
    }
}

NetworkState NetworkState::zero(const NetworkGraph& graph) {
    return NetworkState(graph, Vec::Zero(graph.total_state_dim()));
}

Eigen::VectorBlock<const Vec> NetworkState::node(NodeId i) const {
    if (i < 0 || i >= nodes())
        throw ArgumentError("NetworkState: unknown node id " + std::to_string(i));
    return data_.segment(offsets_[i], dims_[i]);
}

Eigen::VectorBlock<Vec> NetworkState::node(NodeId i) {
    if (i < 0 || i >= nodes())
        throw ArgumentError("NetworkState: unknown node id " + std::to_string(i));
    return data_.segment(offsets_[i], dims_[i]);
}

ControlBox ControlBox::uniform(const NetworkGraph& graph, double lo_v, double hi_v) {
    ControlBox box;
    box.lo.reserve(graph.size());
    box.hi.reserve(graph.size());
    for (int i = 0; i < graph.size(); ++i) {
        box.lo.push_back(Vec::Constant(graph.control_dim(i), lo_v));
        box.hi.push_back(Vec::Constant(graph.control_dim(i), hi_v));
    }
    return box;
}

void ControlBox::validate(const NetworkGraph& graph) const {
    if (static_cast<int>(lo.size()) != graph.size() ||
        static_cast<int>(hi.size()) != graph.size())
        throw DimensionError("ControlBox: need one bound pair per node");
    for (int i = 0; i < graph.size(); ++i) {
        if (lo[i].size() != graph.control_dim(i) || hi[i].size() != graph.control_dim(i))
            throw DimensionError("ControlBox: bound length does not match control dim");
        if ((lo[i].array() > hi[i].array()).any())
            throw ArgumentError("ControlBox: lo must be <= hi componentwise");
    }
}

std::vector<NodeId> neighborhood_support(const NetworkGraph& graph, NodeId i, int hops) {
    if (hops != 1 && hops != 2)
        throw ArgumentError("neighborhood_support: hops must be 1 or 2");
    std::vector<NodeId> support;
    std::set<NodeId> seen;
    support.push_back(i);
    seen.insert(i);
    for (NodeId j : graph.in_neighbors(i)) {
        support.push_back(j);
        seen.insert(j);
    }
    if (hops == 2) {
        std::set<NodeId> second_hop;
        for (NodeId j : graph.in_neighbors(i))
            for (NodeId k : graph.in_neighbors(j))
                if (!seen.count(k)) second_hop.insert(k);
        support.insert(support.end(), second_hop.begin(), second_hop.end());
    }
    return support;
}

Vec gather_neighborhood(const NetworkState& state, const NetworkGraph& graph,
                        NodeId i, int hops) {
    if (state.total_dim() != graph.total_state_dim())
        throw DimensionError("gather_neighborhood: state does not match graph");
    const auto support = neighborhood_support(graph, i, hops);
    int len = 0;
    for (NodeId id : support) len += graph.state_dim(id);
    Vec stacked(len);
    int at = 0;
    for (NodeId id : support) {
        stacked.segment(at, graph.state_dim(id)) = state.node(id);
        at += graph.state_dim(id);
    }
    return stacked;
}

}  // namespace ccbfnet
