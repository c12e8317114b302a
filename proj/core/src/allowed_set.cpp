#include "ccbfnet/allowed_set.hpp"

#include <algorithm>
#include <functional>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

namespace {
constexpr double kFeasTol = 1e-9;
}

AllowedActionSet::AllowedActionSet(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.size() == 0)
        throw DimensionError("AllowedActionSet: bound vectors must match and be nonempty");
    if ((lo_.array() > hi_.array()).any())
        throw ArgumentError("AllowedActionSet: lo must be <= hi componentwise");
}

int AllowedActionSet::add_halfspace(HalfSpace hs) {
    if (hs.normal.size() != dim())
        throw DimensionError("AllowedActionSet: half-space normal has wrong length");
    halfspaces_.push_back(std::move(hs));
    return static_cast<int>(halfspaces_.size()) - 1;
}

void AllowedActionSet::set_halfspace(int index, HalfSpace hs) {
    if (index < 0 || index >= static_cast<int>(halfspaces_.size()))
        throw ArgumentError("AllowedActionSet: half-space index out of range");
    if (hs.normal.size() != dim())
        throw DimensionError("AllowedActionSet: half-space normal has wrong length");
    halfspaces_[index] = std::move(hs);
}

bool AllowedActionSet::contains(const Vec& u, double tol) const {
    if (u.size() != dim()) return false;
    if ((u.array() < lo_.array() - tol).any()) return false;
    if ((u.array() > hi_.array() + tol).any()) return false;
    for (const auto& hs : halfspaces_)
        if (hs.normal.dot(u) + hs.offset < -tol) return false;
    return true;
}

std::vector<Vec> AllowedActionSet::vertices() const {
    const int m = dim();
    struct Row {
        RowVec n;
        double o;
    };
    std::vector<Row> rows;
    for (int c = 0; c < m; ++c) {
        RowVec e = RowVec::Zero(m);
        e(c) = 1.0;
        rows.push_back({e, -lo_(c)});
        rows.push_back({-e, hi_(c)});
    }
    for (const auto& hs : halfspaces_) rows.push_back({hs.normal, hs.offset});

    std::vector<Vec> out;
    auto keep = [&out](const Vec& v) {
        for (const auto& w : out)
            if ((w - v).lpNorm<Eigen::Infinity>() <= 1e-10) return;
        out.push_back(v);
    };

    const int c = static_cast<int>(rows.size());
    std::vector<int> idx(m);
    // All size-m subsets of active constraints.
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == m) {
            Mat a(m, m);
            Vec r(m);
            for (int k = 0; k < m; ++k) {
                a.row(k) = rows[idx[k]].n;
                r(k) = -rows[idx[k]].o;
            }
            Eigen::FullPivLU<Mat> lu(a);
            if (!lu.isInvertible()) return;
            Vec v = lu.solve(r);
            if (contains(v, kFeasTol)) keep(v);
            return;
        }
        for (int k = start; k < c; ++k) {
            idx[depth] = k;
            rec(k + 1, depth + 1);
        }
    };
    rec(0, 0);

    std::sort(out.begin(), out.end(), [](const Vec& a, const Vec& b) {
        for (int k = 0; k < a.size(); ++k) {
            if (a(k) < b(k)) return true;
            if (a(k) > b(k)) return false;
        }
        return false;
    });
    return out;
}

bool AllowedActionSet::empty() const { return vertices().empty(); }

}  // namespace ccbfnet
