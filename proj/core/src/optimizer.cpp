#include "ccbfnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

ControlDerivative ControlDerivative::zero(int m) {
    return {Mat::Zero(m, m), Vec::Zero(m)};
}

ControlDerivative ControlDerivative::decay(int m, double lambda) {
    if (lambda < 0.0) throw ArgumentError("ControlDerivative: decay rate must be nonnegative");
    return {-lambda * Mat::Identity(m, m), Vec::Zero(m)};
}

ControlDerivative ControlDerivative::backward(const Vec& u_prev, double period) {
    if (period <= 0.0) throw ArgumentError("ControlDerivative: period must be positive");
    const int m = static_cast<int>(u_prev.size());
    return {Mat::Identity(m, m) / period, -u_prev / period};
}

double QuadraticObjective::eval(const Vec& u) const {
    const Mat qs = symmetrized();
    return u.dot(qs * u) + (q + lin_gain + deriv_lin).dot(u) + deriv_offset;
}

QuadraticObjective QuadraticObjective::from_bundle(const LieBundle& bundle, double nu,
                                                   const ControlDerivative& deriv) {
    QuadraticObjective obj;
    obj.Q = bundle.lg2_h;
    obj.q = bundle.lf_lg_h + bundle.lg_lf_h;
    obj.lin_gain = nu * bundle.lg_h;
    obj.deriv_lin = bundle.lg_h * deriv.D;
    obj.deriv_offset = bundle.lg_h.dot(deriv.b);
    return obj;
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kValueTieTol = 1e-12;
constexpr int kMaxDim = 3;

struct Row {
    RowVec n;
    double o;  // n*u + o >= 0
};

std::vector<Row> inequality_rows(const AllowedActionSet& set) {
    const int m = set.dim();
    std::vector<Row> rows;
    for (int c = 0; c < m; ++c) {
        RowVec e = RowVec::Zero(m);
        e(c) = 1.0;
        rows.push_back({e, -set.lower()(c)});
        rows.push_back({-e, set.upper()(c)});
    }
    for (const auto& hs : set.halfspaces()) rows.push_back({hs.normal, hs.offset});
    return rows;
}

bool lex_less(const Vec& a, const Vec& b) {
    for (int k = 0; k < a.size(); ++k) {
        if (a(k) < b(k)) return true;
        if (a(k) > b(k)) return false;
    }
    return false;
}

// Snap coordinates that sit a rounding error outside the box back onto it.
void snap_to_box(Vec& u, const AllowedActionSet& set) {
    for (int c = 0; c < u.size(); ++c) {
        if (u(c) < set.lower()(c) && u(c) > set.lower()(c) - kFeasTol) u(c) = set.lower()(c);
        if (u(c) > set.upper()(c) && u(c) < set.upper()(c) + kFeasTol) u(c) = set.upper()(c);
    }
}

/// Stationary points of u^T Qs u + b u on every face of the feasible
/// polytope (optionally sliced by one equality), plus all vertices. The
/// global maximizer of a quadratic over a bounded polytope is always among
/// these: on the relative interior of a face the reduced gradient vanishes,
/// and flat or unbounded face directions reach the face boundary, which is a
/// lower-dimensional face.
std::vector<Vec> kkt_candidates(const Mat& qs, const RowVec& b, const AllowedActionSet& set,
                                const std::optional<std::pair<RowVec, double>>& equality) {
    const int m = set.dim();
    if (m > kMaxDim)
        throw UnsupportedDimensionError(
            "exact enumeration supports control dimension <= 3");
    const std::vector<Row> rows = inequality_rows(set);
    const int n_rows = static_cast<int>(rows.size());
    const int n_eq = equality ? 1 : 0;

    auto feasible = [&](const Vec& u) {
        if (!u.allFinite() || !set.contains(u, kFeasTol)) return false;
        if (equality && std::abs(equality->first.dot(u) - equality->second) > kFeasTol)
            return false;
        return true;
    };

    std::vector<Vec> out;
    auto push = [&](Vec u) {
        snap_to_box(u, set);
        if (!feasible(u)) return;
        for (const auto& w : out)
            if ((w - u).lpNorm<Eigen::Infinity>() <= 1e-10) return;
        out.push_back(std::move(u));
    };

    auto solve_active = [&](const std::vector<int>& active) {
        const int rows_active = n_eq + static_cast<int>(active.size());
        if (rows_active == 0) {
            // Unconstrained stationary point.
            Eigen::FullPivLU<Mat> lu(2.0 * qs);
            if (!lu.isInvertible()) return;
            push(lu.solve(-b.transpose()));
            return;
        }
        Mat a(rows_active, m);
        Vec r(rows_active);
        int at = 0;
        if (equality) {
            a.row(at) = equality->first;
            r(at) = equality->second;
            ++at;
        }
        for (int k : active) {
            a.row(at) = rows[k].n;
            r(at) = -rows[k].o;
            ++at;
        }
        Eigen::FullPivLU<Mat> lu(a);
        if (lu.rank() < rows_active) return;
        if (rows_active == m) {
            push(lu.solve(r));
            return;
        }
        const Vec p = a.completeOrthogonalDecomposition().solve(r);
        const Mat z = lu.kernel();
        Eigen::FullPivLU<Mat> lur(2.0 * z.transpose() * qs * z);
        if (!lur.isInvertible()) return;
        const Vec t = lur.solve(-z.transpose() * (2.0 * qs * p + b.transpose()));
        push(p + z * t);
    };

    // Every active subset of size 0 .. m - n_eq.
    std::vector<int> active;
    std::function<void(int, int)> rec = [&](int start, int remaining) {
        solve_active(active);
        if (remaining == 0) return;
        for (int k = start; k < n_rows; ++k) {
            active.push_back(k);
            rec(k + 1, remaining - 1);
            active.pop_back();
        }
    };
    rec(0, m - n_eq);
    return out;
}

MaxLocation classify_location(const Vec& u, const AllowedActionSet& set) {
    int active = 0;
    for (const auto& row : inequality_rows(set))
        if (std::abs(row.n.dot(u) + row.o) <= 1e-8) ++active;
    if (active == 0) return MaxLocation::interior;
    return active >= set.dim() ? MaxLocation::vertex : MaxLocation::face;
}

struct BestPick {
    Vec u;
    double value;
    bool unique;
};

BestPick pick_best(const std::vector<Vec>& candidates,
                   const std::function<double(const Vec&)>& value) {
    BestPick best{candidates.front(), value(candidates.front()), true};
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double v = value(candidates[k]);
        const double tie = kValueTieTol * std::max(1.0, std::abs(best.value));
        if (v > best.value + tie) {
            best = {candidates[k], v, true};
        } else if (v >= best.value - tie) {
            if ((candidates[k] - best.u).lpNorm<Eigen::Infinity>() > 1e-9) best.unique = false;
            if (lex_less(candidates[k], best.u)) best.u = candidates[k];
        }
    }
    best.value = value(best.u);
    return best;
}

}  // namespace

MaximizerResult maximize_linear(const RowVec& gradient, const AllowedActionSet& feasible) {
    if (gradient.size() != feasible.dim())
        throw DimensionError("maximize_linear: gradient length does not match set");
    MaximizerResult res;
    int zero_entries = 0;
    for (int c = 0; c < gradient.size(); ++c)
        if (gradient(c) == 0.0) ++zero_entries;
    res.unique = (zero_entries == 0);

    if (feasible.is_box()) {
        Vec u(feasible.dim());
        for (int c = 0; c < feasible.dim(); ++c)
            u(c) = gradient(c) > 0.0 ? feasible.upper()(c) : feasible.lower()(c);
        res.u_star = u;
        res.value = gradient.dot(u);
        res.location = zero_entries == gradient.size() ? MaxLocation::interior
                       : zero_entries == 0             ? MaxLocation::vertex
                                                       : MaxLocation::face;
        return res;
    }

    const auto verts = kkt_candidates(Mat::Zero(feasible.dim(), feasible.dim()),
                                      gradient, feasible, std::nullopt);
    if (verts.empty()) throw InfeasibleError("maximize_linear: empty feasible set");
    const auto best = pick_best(verts, [&](const Vec& u) { return gradient.dot(u); });
    res.u_star = best.u;
    res.value = best.value;
    res.location = classify_location(best.u, feasible);
    return res;
}

MaximizerResult maximize_capability(const QuadraticObjective& obj,
                                    const AllowedActionSet& feasible) {
    const int m = feasible.dim();
    if (obj.Q.rows() != m || obj.Q.cols() != m || obj.q.size() != m ||
        obj.lin_gain.size() != m || obj.deriv_lin.size() != m)
        throw DimensionError("maximize_capability: objective shapes do not match set");
    const Mat qs = obj.symmetrized();
    const RowVec b = obj.q + obj.lin_gain + obj.deriv_lin;
    const auto candidates = kkt_candidates(qs, b, feasible, std::nullopt);
    if (candidates.empty())
        throw InfeasibleError("maximize_capability: empty feasible set");
    const auto best = pick_best(candidates, [&](const Vec& u) {
        return u.dot(qs * u) + b.dot(u) + obj.deriv_offset;
    });
    MaximizerResult res;
    res.u_star = best.u;
    res.value = best.value;
    res.unique = best.unique;
    res.location = classify_location(best.u, feasible);
    return res;
}

Vec min_norm_point(const AllowedActionSet& feasible,
                   const std::optional<std::pair<RowVec, double>>& equality) {
    std::optional<std::pair<RowVec, double>> eq = equality;
    if (eq && eq->first.lpNorm<Eigen::Infinity>() == 0.0) {
        // Degenerate slice: 0*u = target.
        if (std::abs(eq->second) > kFeasTol)
            throw InfeasibleError("min_norm_point: unsatisfiable equality restriction");
        eq.reset();
    }
    const int m = feasible.dim();
    const auto candidates =
        kkt_candidates(-Mat::Identity(m, m), RowVec::Zero(m), feasible, eq);
    if (candidates.empty()) throw InfeasibleError("min_norm_point: empty feasible set");
    const auto best = pick_best(candidates, [](const Vec& u) { return -u.squaredNorm(); });
    return best.u;
}

std::pair<double, double> linear_range(const RowVec& a, const AllowedActionSet& feasible) {
    const auto hi = maximize_linear(a, feasible);
    const auto lo = maximize_linear(-a, feasible);
    return {-lo.value, hi.value};
}

NuStarResult find_nu_star(const NodeCapabilityProblem& problem, double delta_nu,
                          double nu_max) {
    if (delta_nu <= 0.0) throw ArgumentError("find_nu_star: delta_nu must be positive");
    if (nu_max < 0.0) throw ArgumentError("find_nu_star: nu_max must be nonnegative");
    const auto linear = maximize_linear(problem.bundle.lg_h, problem.allowed);
    if (!linear.unique)
        throw IllPosedError(
            "find_nu_star: linear maximizer is not unique because an entry of L_g h is "
            "zero; the control-effect assumption is violated at this state");

    const int grid = static_cast<int>(std::floor(nu_max / delta_nu + 1e-9));
    int first = -1;
    bool contiguous = true;
    for (int k = 0; k <= grid; ++k) {
        const double nu = k * delta_nu;
        const auto obj = QuadraticObjective::from_bundle(problem.bundle, nu, problem.deriv);
        const auto quad = maximize_capability(obj, problem.allowed);
        const bool agree =
            (quad.u_star - linear.u_star).lpNorm<Eigen::Infinity>() <= 1e-9;
        if (agree && first < 0) first = k;
        if (!agree && first >= 0) contiguous = false;
    }
    NuStarResult res;
    if (first < 0) {
        res.nu_star = nu_max;
        res.saturated = true;
    } else {
        res.nu_star = first * delta_nu;
    }
    res.contiguous = contiguous;
    return res;
}

}  // namespace ccbfnet
