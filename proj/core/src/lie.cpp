#include "ccbfnet/lie.hpp"

#include <cmath>
#include <limits>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

void ClassKParams::validate() const {
    if (eta < 0.0 || kappa < 0.0)
        throw ArgumentError("ClassKParams: gains must be nonnegative");
}

namespace {

void require_finite(double v, const std::string& term) {
    if (!std::isfinite(v))
        throw NumericalDomainError("lie_bundle: non-finite value in term " + term);
}

void require_finite(const Eigen::Ref<const Mat>& m, const std::string& term) {
    if (!m.allFinite())
        throw NumericalDomainError("lie_bundle: non-finite value in term " + term);
}

}  // namespace

LieBundle lie_bundle(const DynamicsModel& model, const BarrierSpec& barrier,
                     const NetworkGraph& graph, const NetworkState& state,
                     NodeId i) {
    if (state.total_dim() != graph.total_state_dim())
        throw DimensionError("lie_bundle: state does not match graph");
    const Vec x_i = state.node(i);
    const RowVec grad = barrier.gradient(x_i);
    const Mat hess = barrier.hessian(x_i);
    const Vec f_i = model.drift(state, i);
    const Mat g_i = model.input_map(state, i);
    const int n_i = graph.state_dim(i);
    const int m_i = graph.control_dim(i);
    if (grad.size() != n_i || hess.rows() != n_i || hess.cols() != n_i)
        throw DimensionError("lie_bundle: barrier derivative shapes do not match state dim");
    if (f_i.size() != n_i || g_i.rows() != n_i || g_i.cols() != m_i)
        throw DimensionError("lie_bundle: dynamics shapes do not match node dims");

    LieBundle b;
    b.node = i;
    b.h = barrier.value(x_i);
    require_finite(b.h, "h");
    b.lf_h = grad.dot(f_i);
    require_finite(b.lf_h, "lf_h");
    b.lg_h = grad * g_i;
    require_finite(b.lg_h, "lg_h");

    // d(L_f h)/dx_i = f^T H + grad * (df/dx_i)
    const Mat jf_ii = model.drift_jacobian(state, i, i);
    const RowVec d_lf = f_i.transpose() * hess + grad * jf_ii;
    b.lf2_h = d_lf.dot(f_i);
    require_finite(b.lf2_h, "lf2_h");
    b.lg_lf_h = d_lf * g_i;
    require_finite(b.lg_lf_h, "lg_lf_h");

    const std::vector<Mat> jg = model.input_map_jacobian(state, i);
    if (static_cast<int>(jg.size()) != m_i)
        throw DimensionError("lie_bundle: input_map_jacobian must have one block per control");
    b.lf_lg_h = RowVec::Zero(m_i);
    b.lg2_h = Mat::Zero(m_i, m_i);
    for (int m = 0; m < m_i; ++m) {
        const RowVec d_lg = g_i.col(m).transpose() * hess + grad * jg[m];
        b.lf_lg_h(m) = d_lg.dot(f_i);
        b.lg2_h.row(m) = d_lg * g_i;
    }
    require_finite(b.lf_lg_h, "lf_lg_h");
    require_finite(b.lg2_h, "lg2_h");

    for (NodeId j : graph.in_neighbors(i)) {
        const Mat jf_ij = model.drift_jacobian(state, i, j);
        const RowVec w = grad * jf_ij;
        b.cross_f[j] = w.dot(model.drift(state, j));
        require_finite(b.cross_f[j], "cross_f[" + std::to_string(j) + "]");
        b.cross_g[j] = w * model.input_map(state, j);
        require_finite(b.cross_g[j], "cross_g[" + std::to_string(j) + "]");
    }
    return b;
}

const RowVec& coupling_gain(const LieBundle& bundle, NodeId j) {
    const auto it = bundle.cross_g.find(j);
    if (it == bundle.cross_g.end())
        throw ArgumentError("coupling_gain: node " + std::to_string(j) +
                            " is not an incoming neighbor of " + std::to_string(bundle.node));
    return it->second;
}

double psi1(const LieBundle& bundle, const ClassKParams& params, const Vec& u_i) {
    if (u_i.size() != bundle.control_dim())
        throw DimensionError("psi1: control length does not match node");
    return bundle.lf_h + bundle.lg_h.dot(u_i) + params.eta * bundle.h;
}

double capability(const LieBundle& bundle, const ClassKParams& params,
                  const Vec& u_i, const Vec& d_of_u) {
    if (u_i.size() != bundle.control_dim() || d_of_u.size() != bundle.control_dim())
        throw DimensionError("capability: control length does not match node");
    const double nu = params.nu();
    double c = 0.0;
    for (const auto& [j, v] : bundle.cross_f) c += v;
    c += bundle.lf2_h;
    c += u_i.dot(bundle.lg2_h * u_i);
    c += params.kappa * params.eta * bundle.h;
    c += nu * bundle.lf_h;
    c += bundle.lg_h.dot(d_of_u);
    c += (bundle.lf_lg_h + bundle.lg_lf_h + nu * bundle.lg_h).dot(u_i);
    return c;
}

namespace {

double second_derivative(const LieBundle& b, const Vec& u_i,
                         const std::map<NodeId, Vec>& u_neighbors, const Vec& d_of_u) {
    double hdd = 0.0;
    for (const auto& [j, cf] : b.cross_f) {
        const auto it = u_neighbors.find(j);
        if (it == u_neighbors.end())
            throw ArgumentError("psi2: missing neighbor control for node " + std::to_string(j));
        hdd += cf + b.cross_g.at(j).dot(it->second);
    }
    hdd += b.lf2_h + u_i.dot(b.lg2_h * u_i) + b.lg_h.dot(d_of_u);
    hdd += (b.lf_lg_h + b.lg_lf_h).dot(u_i);
    return hdd;
}

}  // namespace

double psi2_direct(const LieBundle& bundle, const ClassKParams& params,
                   const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors,
                   const Vec& d_of_u) {
    const double hdot = bundle.lf_h + bundle.lg_h.dot(u_i);
    const double hdd = second_derivative(bundle, u_i, u_neighbors, d_of_u);
    // With linear gains, d/dt[eta*h] = eta*hdot.
    return hdd + params.eta * hdot + params.kappa * (hdot + params.eta * bundle.h);
}

double psi2_decomposed(const LieBundle& bundle, const ClassKParams& params,
                       const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors,
                       const Vec& d_of_u) {
    double s = 0.0;
    for (const auto& [j, a_ij] : bundle.cross_g) {
        const auto it = u_neighbors.find(j);
        if (it == u_neighbors.end())
            throw ArgumentError("psi2: missing neighbor control for node " + std::to_string(j));
        s += a_ij.dot(it->second);
    }
    return s + capability(bundle, params, u_i, d_of_u);
}

double AuditReport::worst() const {
    double w = 0.0;
    for (const auto& [name, e] : max_rel_error) w = std::max(w, e);
    return w;
}

namespace {

// Relative error with an absolute floor so terms that are numerically zero
// compare cleanly.
double rel_err(double analytic, double fd) {
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
    return std::abs(analytic - fd) / denom;
}

struct FdHelper {
    const DynamicsModel& model;
    const BarrierSpec& barrier;
    const NetworkGraph& graph;
    NodeId i;

    NetworkState shifted(const NetworkState& base, NodeId at, const Vec& dir,
                         double s) const {
        NetworkState y = base;
        y.node(at) += s * dir;
        return y;
    }

    double h_at(const NetworkState& y) const { return barrier.value(y.node(i)); }

    // First difference of h along the node-i drift direction evaluated at y:
    // approximates L_f h(y).
    double lf_h_fd(const NetworkState& y, double e) const {
        const Vec f = model.drift(y, i);
        return (h_at(shifted(y, i, f, e)) - h_at(shifted(y, i, f, -e))) / (2.0 * e);
    }

    // First difference along input-map column m at y: approximates (L_g h)_m.
    double lg_h_fd(const NetworkState& y, int m, double e) const {
        const Vec gm = model.input_map(y, i).col(m);
        return (h_at(shifted(y, i, gm, e)) - h_at(shifted(y, i, gm, -e))) / (2.0 * e);
    }
};

}  // namespace

AuditReport finite_difference_audit(const DynamicsModel& model,
                                    const BarrierSpec& barrier,
                                    const NetworkGraph& graph,
                                    const NetworkState& state, NodeId i,
                                    double step) {
    if (step <= 0.0) throw ArgumentError("finite_difference_audit: step must be positive");
    const LieBundle b = lie_bundle(model, barrier, graph, state, i);
    const FdHelper fd{model, barrier, graph, i};
    const double e = step;

    AuditReport report;
    report.step = step;
    // Nested central differences divide rounding noise by step^2; below this
    // threshold the quotient noise outweighs anything the audit can resolve.
    report.cancellation_warning =
        std::numeric_limits<double>::epsilon() / (step * step) > 1e-3;

    auto record = [&report](const std::string& term, double err) {
        auto [it, inserted] = report.max_rel_error.try_emplace(term, err);
        if (!inserted) it->second = std::max(it->second, err);
    };

    const int m_i = b.control_dim();
    const Vec f_i = model.drift(state, i);
    const Mat g_i = model.input_map(state, i);

    record("lf_h", rel_err(b.lf_h, fd.lf_h_fd(state, e)));
    for (int m = 0; m < m_i; ++m)
        record("lg_h", rel_err(b.lg_h(m), fd.lg_h_fd(state, m, e)));

    auto outer_lf = [&](NodeId at, const Vec& dir) {
        return (fd.lf_h_fd(fd.shifted(state, at, dir, e), e) -
                fd.lf_h_fd(fd.shifted(state, at, dir, -e), e)) /
               (2.0 * e);
    };
    auto outer_lg = [&](int m, NodeId at, const Vec& dir) {
        return (fd.lg_h_fd(fd.shifted(state, at, dir, e), m, e) -
                fd.lg_h_fd(fd.shifted(state, at, dir, -e), m, e)) /
               (2.0 * e);
    };

    record("lf2_h", rel_err(b.lf2_h, outer_lf(i, f_i)));
    for (int m = 0; m < m_i; ++m) {
        record("lg_lf_h", rel_err(b.lg_lf_h(m), outer_lf(i, g_i.col(m))));
        record("lf_lg_h", rel_err(b.lf_lg_h(m), outer_lg(m, i, f_i)));
        for (int l = 0; l < m_i; ++l)
            record("lg2_h", rel_err(b.lg2_h(m, l), outer_lg(m, i, g_i.col(l))));
    }
    for (NodeId j : graph.in_neighbors(i)) {
        const Vec f_j = model.drift(state, j);
        const Mat g_j = model.input_map(state, j);
        record("cross_f", rel_err(b.cross_f.at(j), outer_lf(j, f_j)));
        for (int m = 0; m < g_j.cols(); ++m)
            record("cross_g", rel_err(b.cross_g.at(j)(m), outer_lf(j, g_j.col(m))));
    }
    return report;
}

double jacobian_audit(const DynamicsModel& model, const NetworkGraph& graph,
                      const NetworkState& state, NodeId i, double step) {
    if (step <= 0.0) throw ArgumentError("jacobian_audit: step must be positive");
    double worst = 0.0;
    auto update = [&worst](double analytic, double fd) {
        worst = std::max(worst, rel_err(analytic, fd));
    };

    std::vector<NodeId> blocks = graph.in_neighbors(i);
    blocks.push_back(i);
    for (NodeId j : blocks) {
        const Mat jac = model.drift_jacobian(state, i, j);
        for (int c = 0; c < graph.state_dim(j); ++c) {
            NetworkState plus = state, minus = state;
            plus.node(j)(c) += step;
            minus.node(j)(c) -= step;
            const Vec col = (model.drift(plus, i) - model.drift(minus, i)) / (2.0 * step);
            for (int r = 0; r < graph.state_dim(i); ++r) update(jac(r, c), col(r));
        }
    }
    const std::vector<Mat> jg = model.input_map_jacobian(state, i);
    for (int c = 0; c < graph.state_dim(i); ++c) {
        NetworkState plus = state, minus = state;
        plus.node(i)(c) += step;
        minus.node(i)(c) -= step;
        const Mat dg = (model.input_map(plus, i) - model.input_map(minus, i)) / (2.0 * step);
        for (int m = 0; m < graph.control_dim(i); ++m)
            for (int r = 0; r < graph.state_dim(i); ++r) update(jg[m](r, c), dg(r, m));
    }
    return worst;
}

}  // namespace ccbfnet
