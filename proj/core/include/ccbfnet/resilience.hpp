#pragma once

#include <string>

#include "ccbfnet/allowed_set.hpp"
#include "ccbfnet/lie.hpp"
#include "ccbfnet/optimizer.hpp"

namespace ccbfnet {

/// Minimal assistance a neighbor owes on one edge: a member of
/// { u in allowed : gain * u + commitment_offset = 0 }, where
/// commitment_offset is the half-space constant (the negated promise).
struct MinimalAssistance {
    Vec u;
    /// The zero level set was attainable; when false, u is the feasible point
    /// minimizing |gain * u + commitment_offset|.
    bool exact = true;
    /// The level set may contain more than one point; the minimum-norm member
    /// was returned.
    bool multi_member = false;
};

MinimalAssistance minimal_assistance(const RowVec& gain, double commitment_offset,
                                     const AllowedActionSet& allowed);

/// Signed compliance of one neighbor action against the minimal assistance:
/// gain * (u_min - u_actual). Negative values are labeled non-compliant.
double compliance(const RowVec& gain, const Vec& u_min, const Vec& u_actual);

/// Non-compliance tolerance at a fixed state: the capability gap between the
/// plain linear maximizer driven at gain nu_star and the communicated
/// maximizer at gain nu. Zero for nu >= nu_star (the maximizers coincide
/// there; a disagreement raises ConsistencyError).
double epsilon_tolerance(const LieBundle& bundle, const ControlDerivative& deriv,
                         double nu, double nu_star, const Vec& u_star, const Vec& u_c);

struct ResilienceReport {
    double e = 0.0;
    double epsilon = 0.0;
    double nu = 0.0;
    double nu_star = 0.0;
    bool within_bound = true;
};

/// within_bound is true when the neighborhood is compliant (e >= 0) or the
/// non-compliance magnitude is covered by the tolerance (|e| <= epsilon).
ResilienceReport check_resilience(double e, double epsilon, double nu, double nu_star);

/// Display sign convention for compliance values in reports. The bound check
/// always uses |e| and is unaffected.
enum class ComplianceSign { paper, delivered_minus_requested };

std::string resilience_csv_header();
std::string resilience_csv_row(double t, NodeId node_1based, const ResilienceReport& r,
                               ComplianceSign sign = ComplianceSign::paper);

}  // namespace ccbfnet
