#pragma once

#include <string>
#include <vector>

#include "ccbfnet/sim.hpp"

namespace ccbfnet {

/// Shortest round-trip-safe decimal form (17 significant digits).
std::string format_number(double v);

/// One row per (t, node): t,i,x_i,u_i,h_i,psi1,psi2,delta_i,e_i,epsilon_i,lo_i,hi_i.
/// Node ids are 1-based. Requires scalar per-node states and controls.
std::string trajectory_csv(const Trajectory& traj);

/// One row per (t, node): t,i,e_i,epsilon_i,nu_i,nu_star_i,within_bound.
std::string resilience_csv(const Trajectory& traj,
                           ComplianceSign sign = ComplianceSign::paper);

struct NuStarRow {
    double x = 0.0;
    double nu_star = 0.0;
    bool saturated = false;
    bool contiguous = true;
    bool ill_posed = false;
};

std::string nu_star_csv(const std::vector<NuStarRow>& rows);

struct EpsilonRow {
    double x = 0.0;
    double nu = 0.0;
    double epsilon = 0.0;
};

std::string epsilon_surface_csv(const std::vector<EpsilonRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ccbfnet
