#include "ccbfnet/resilience.hpp"

#include <cmath>
#include <cstdio>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

MinimalAssistance minimal_assistance(const RowVec& gain, double commitment_offset,
                                     const AllowedActionSet& allowed) {
    if (gain.size() != allowed.dim())
        throw DimensionError("minimal_assistance: gain length does not match action set");
    const auto [lo, hi] = linear_range(gain, allowed);
    const double target = -commitment_offset;
    const double attainable = std::min(std::max(target, lo), hi);

    MinimalAssistance out;
    out.exact = std::abs(attainable - target) <= 1e-12 * std::max(1.0, std::abs(target));
    out.u = min_norm_point(allowed, std::make_pair(gain, attainable));
    const bool zero_gain = gain.lpNorm<Eigen::Infinity>() == 0.0;
    out.multi_member = zero_gain || allowed.dim() > 1;
    return out;
}

double compliance(const RowVec& gain, const Vec& u_min, const Vec& u_actual) {
    if (gain.size() != u_min.size() || gain.size() != u_actual.size())
        throw DimensionError("compliance: shapes do not match");
    return gain.dot(u_min - u_actual);
}

double epsilon_tolerance(const LieBundle& bundle, const ControlDerivative& deriv,
                         double nu, double nu_star, const Vec& u_star, const Vec& u_c) {
    if (nu >= nu_star) {
        if ((u_star - u_c).lpNorm<Eigen::Infinity>() > 1e-9)
            throw ConsistencyError(
                "epsilon_tolerance: nu >= nu_star but the maximizers disagree");
        return 0.0;
    }
    const Vec d = u_star - u_c;
    const Mat qs = 0.5 * (bundle.lg2_h + bundle.lg2_h.transpose());
    const RowVec q = bundle.lf_lg_h + bundle.lg_lf_h;
    double eps = d.dot(qs * d) + q.dot(d);
    eps += bundle.lg_h.dot(deriv.eval(u_star) - deriv.eval(u_c));
    eps += nu_star * bundle.lg_h.dot(u_star) - nu * bundle.lg_h.dot(u_c);
    if (eps < 0.0 && eps > -1e-12) eps = 0.0;  // rounding guard
    return eps;
}

ResilienceReport check_resilience(double e, double epsilon, double nu, double nu_star) {
    if (epsilon < 0.0)
        throw ArgumentError("check_resilience: tolerance must be nonnegative");
    ResilienceReport r;
    r.e = e;
    r.epsilon = epsilon;
    r.nu = nu;
    r.nu_star = nu_star;
    r.within_bound = (e >= 0.0) || (std::abs(e) <= epsilon);
    return r;
}

std::string resilience_csv_header() {
    return "t,i,e_i,epsilon_i,nu_i,nu_star_i,within_bound";
}

std::string resilience_csv_row(double t, NodeId node_1based, const ResilienceReport& r,
                               ComplianceSign sign) {
    const double e_display = sign == ComplianceSign::paper ? r.e : -r.e;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d", t,
                  node_1based, e_display, r.epsilon, r.nu, r.nu_star,
                  r.within_bound ? 1 : 0);
    return std::string(buf);
}

}  // namespace ccbfnet
