#pragma once

#include <vector>

#include "ccbfnet/types.hpp"

namespace ccbfnet {

/// Closed half-space { u : normal * u + offset >= 0 }.
struct HalfSpace {
    RowVec normal;
    double offset = 0.0;
};

/// Feasible action region of one node: its control box intersected with the
/// half-spaces induced by safety commitments to outgoing neighbors. Always
/// closed and bounded; may be empty.
class AllowedActionSet {
public:
    AllowedActionSet(Vec lo, Vec hi);

    int dim() const { return static_cast<int>(lo_.size()); }
    const Vec& lower() const { return lo_; }
    const Vec& upper() const { return hi_; }
    const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
    bool is_box() const { return halfspaces_.empty(); }

    /// Appends a half-space; returns its index for later tightening.
    int add_halfspace(HalfSpace hs);
    void set_halfspace(int index, HalfSpace hs);

    bool contains(const Vec& u, double tol = 1e-9) const;
    /// Exact emptiness test (vertex enumeration; dim <= 3).
    bool empty() const;

    /// All polytope vertices, deduplicated, lexicographically sorted.
    std::vector<Vec> vertices() const;

private:
    Vec lo_, hi_;
    std::vector<HalfSpace> halfspaces_;
};

}  // namespace ccbfnet
