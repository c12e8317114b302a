#pragma once

#include <optional>

#include "ccbfnet/allowed_set.hpp"
#include "ccbfnet/lie.hpp"
#include "ccbfnet/types.hpp"

namespace ccbfnet {

/// Affine model of the control derivative, d(u) = D u + b. Keeping d affine
/// keeps the capability maximization an exact quadratic program.
struct ControlDerivative {
    Mat D;
    Vec b;

    Vec eval(const Vec& u) const { return D * u + b; }
    static ControlDerivative zero(int m);
    static ControlDerivative decay(int m, double lambda);
    /// Backward difference against the previously applied control.
    static ControlDerivative backward(const Vec& u_prev, double period);
};

/// The u_i-dependent part of the capability:
///   u^T Q u + (q + lin_gain) u + lgh_d(u),
/// where lgh_d(u) = deriv_lin * u + deriv_offset is the (affine)
/// control-derivative term. Constant capability terms are not included;
/// evaluate the full capability through the Lie bundle.
struct QuadraticObjective {
    Mat Q;             // symmetrized as (Q + Q^T)/2 before use
    RowVec q;
    RowVec lin_gain;   // nu * L_g h
    RowVec deriv_lin;
    double deriv_offset = 0.0;

    double eval(const Vec& u) const;
    Mat symmetrized() const { return 0.5 * (Q + Q.transpose()); }

    static QuadraticObjective from_bundle(const LieBundle& bundle, double nu,
                                          const ControlDerivative& deriv);
};

enum class MaxLocation { interior, face, vertex };

struct MaximizerResult {
    Vec u_star;
    double value = 0.0;
    MaxLocation location = MaxLocation::vertex;
    bool unique = true;
};

/// Exact maximizer of gradient * u over the feasible region. For a plain box
/// this is componentwise bound selection; zero gradient entries break ties
/// toward the lower bound and clear the uniqueness flag.
MaximizerResult maximize_linear(const RowVec& gradient, const AllowedActionSet& feasible);

/// Exact global maximizer of the quadratic objective over the feasible
/// region by enumeration of stationary points on every face of the polytope
/// (supported for dim <= 3). Handles negative definite, positive definite
/// and indefinite Q.
MaximizerResult maximize_capability(const QuadraticObjective& obj,
                                    const AllowedActionSet& feasible);

/// Minimum-norm feasible point, optionally restricted to the slice
/// { u : a * u = target } (a zero `a` drops the restriction). Exact for
/// dim <= 3.
Vec min_norm_point(const AllowedActionSet& feasible,
                   const std::optional<std::pair<RowVec, double>>& equality = std::nullopt);

/// Range [min, max] of a * u over the feasible region.
std::pair<double, double> linear_range(const RowVec& a, const AllowedActionSet& feasible);

/// One node's capability-maximization context at a fixed state.
struct NodeCapabilityProblem {
    LieBundle bundle;
    AllowedActionSet allowed;
    ControlDerivative deriv;
};

struct NuStarResult {
    double nu_star = 0.0;
    /// No grid point up to nu_max produced agreement.
    bool saturated = false;
    /// Agreement holds on every grid point at and above nu_star.
    bool contiguous = true;
};

/// Smallest nu on the grid {0, delta_nu, 2 delta_nu, ...} <= nu_max at which
/// the capability argmax coincides with the linear argmax (componentwise
/// tolerance 1e-9). Throws IllPosedError if the linear maximizer is not
/// unique (a zero entry of L_g h).
NuStarResult find_nu_star(const NodeCapabilityProblem& problem, double delta_nu,
                          double nu_max);

}  // namespace ccbfnet
