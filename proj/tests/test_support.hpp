#pragma once

#include <functional>
#include <random>
#include <vector>

#include "ccbfnet/allowed_set.hpp"
#include "ccbfnet/network.hpp"
#include "ccbfnet/sis.hpp"

namespace ccbfnet::testing {

inline NetworkState state3(const NetworkGraph& g, double x1, double x2, double x3) {
    Vec flat(3);
    flat << x1, x2, x3;
    return NetworkState(g, flat);
}

inline Vec scalar(double v) { return Vec::Constant(1, v); }

/// Uniform random network state in [lo, hi]^n with a fixed seed.
inline NetworkState random_state(const NetworkGraph& g, std::mt19937& rng, double lo,
                                 double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec flat(g.total_state_dim());
    for (int k = 0; k < flat.size(); ++k) flat(k) = dist(rng);
    return NetworkState(g, flat);
}

/// Exhaustive grid maximizer over box-with-halfspaces, dim 1 or 2.
/// Independent of the exact KKT solver; used as the value oracle.
inline double grid_search_max(const std::function<double(const Vec&)>& objective,
                              const AllowedActionSet& set, double step) {
    const int m = set.dim();
    double best = -std::numeric_limits<double>::infinity();
    // Lattices include the exact upper bound of every axis.
    auto axis_count = [&](int c) {
        return static_cast<int>(std::floor((set.upper()(c) - set.lower()(c)) / step)) + 2;
    };
    auto coord = [&](int c, int k) {
        return std::min(set.lower()(c) + k * step, set.upper()(c));
    };
    if (m == 1) {
        for (int k = 0; k < axis_count(0); ++k) {
            Vec v = Vec::Constant(1, coord(0, k));
            if (set.contains(v, 1e-12)) best = std::max(best, objective(v));
        }
    } else if (m == 2) {
        for (int k0 = 0; k0 < axis_count(0); ++k0) {
            for (int k1 = 0; k1 < axis_count(1); ++k1) {
                Vec v(2);
                v << coord(0, k0), coord(1, k1);
                if (set.contains(v, 1e-12)) best = std::max(best, objective(v));
            }
        }
    }
    return best;
}

/// Maximum of u^T Q u + b u over the fine lattice {lo + k*step} of a 2-D box.
/// Two-stage exhaustive search: a coarse pass bounds the objective through
/// its Lipschitz constant (the gradient is affine, so its norm peaks at a box
/// corner), then every coarse cell that could still contain the lattice
/// maximum is enumerated at full resolution. Evaluates exactly the same
/// lattice as the naive scan, provably without losing the maximizer.
inline double lattice_quadratic_max_2d(const Mat& q_raw, const RowVec& b, const Vec& lo,
                                       const Vec& hi, double step) {
    const Mat qs = 0.5 * (q_raw + q_raw.transpose());
    const double q00 = qs(0, 0), q01 = qs(0, 1), q11 = qs(1, 1);
    const double b0 = b(0), b1 = b(1);
    auto value = [&](double u0, double u1) {
        return q00 * u0 * u0 + 2.0 * q01 * u0 * u1 + q11 * u1 * u1 + b0 * u0 + b1 * u1;
    };
    double lipschitz = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
        Vec u(2);
        u << (corner & 1 ? hi(0) : lo(0)), (corner & 2 ? hi(1) : lo(1));
        lipschitz = std::max(lipschitz, (2.0 * qs * u + b.transpose()).norm());
    }

    // Lattice: lo + k*step for every k fitting the box, plus the exact upper
    // face of each axis.
    const int n0 = static_cast<int>(std::floor((hi(0) - lo(0)) / step)) + 2;
    const int n1 = static_cast<int>(std::floor((hi(1) - lo(1)) / step)) + 2;
    auto coord0 = [&](int k) { return std::min(lo(0) + k * step, hi(0)); };
    auto coord1 = [&](int k) { return std::min(lo(1) + k * step, hi(1)); };
    const int chunk = 64;  // fine lattice points per coarse cell and axis
    const double radius = chunk * step;  // farthest fine point from a cell anchor

    double coarse_best = -std::numeric_limits<double>::infinity();
    for (int k0 = 0; k0 < n0; k0 += chunk)
        for (int k1 = 0; k1 < n1; k1 += chunk)
            coarse_best = std::max(coarse_best, value(coord0(k0), coord1(k1)));

    const double margin = lipschitz * radius * std::sqrt(2.0);
    double best = coarse_best;
    for (int k0 = 0; k0 < n0; k0 += chunk) {
        for (int k1 = 0; k1 < n1; k1 += chunk) {
            if (value(coord0(k0), coord1(k1)) < coarse_best - margin)
                continue;  // no fine point of this cell can beat the coarse best
            const int e0 = std::min(n0, k0 + chunk);
            const int e1 = std::min(n1, k1 + chunk);
            for (int i0 = k0; i0 < e0; ++i0)
                for (int i1 = k1; i1 < e1; ++i1)
                    best = std::max(best, value(coord0(i0), coord1(i1)));
        }
    }
    return best;
}

}  // namespace ccbfnet::testing
