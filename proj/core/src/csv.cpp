#include "ccbfnet/csv.hpp"

#include <cstdio>
#include <fstream>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,i,x_i,u_i,h_i,psi1,psi2,delta_i,e_i,epsilon_i,lo_i,hi_i\n";
    for (const auto& s : traj.samples) {
        const int n = static_cast<int>(s.state.size());
        for (int i = 0; i < n; ++i) {
            if (s.state[i].size() != 1 || s.control[i].size() != 1)
                throw DimensionError("trajectory_csv: requires scalar nodes");
            out += format_number(s.t);
            out += ',' + std::to_string(i + 1);
            out += ',' + format_number(s.state[i](0));
            out += ',' + format_number(s.control[i](0));
            out += ',' + format_number(s.h[i]);
            out += ',' + format_number(s.psi1[i]);
            out += ',' + format_number(s.psi2[i]);
            out += ',' + format_number(s.deficit[i]);
            out += ',' + format_number(s.e[i]);
            out += ',' + format_number(s.epsilon[i]);
            out += ',' + format_number(s.lo[i](0));
            out += ',' + format_number(s.hi[i](0));
            out += '\n';
        }
    }
    return out;
}

std::string resilience_csv(const Trajectory& traj, ComplianceSign sign) {
    std::string out = resilience_csv_header() + "\n";
    for (const auto& s : traj.resilience) {
        for (std::size_t i = 0; i < s.per_node.size(); ++i) {
            out += resilience_csv_row(s.t, static_cast<int>(i) + 1, s.per_node[i], sign);
            out += '\n';
        }
    }
    return out;
}

std::string nu_star_csv(const std::vector<NuStarRow>& rows) {
    std::string out = "x,nu_star,saturated,contiguous,ill_posed\n";
    for (const auto& r : rows) {
        out += format_number(r.x);
        out += ',' + format_number(r.nu_star);
        out += ',' + std::to_string(r.saturated ? 1 : 0);
        out += ',' + std::to_string(r.contiguous ? 1 : 0);
        out += ',' + std::to_string(r.ill_posed ? 1 : 0);
        out += '\n';
    }
    return out;
}

std::string epsilon_surface_csv(const std::vector<EpsilonRow>& rows) {
    std::string out = "x,nu,epsilon\n";
    for (const auto& r : rows) {
        out += format_number(r.x);
        out += ',' + format_number(r.nu);
        out += ',' + format_number(r.epsilon);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << content;
    if (!f) throw Error("write failed: " + path);
}

}  // namespace ccbfnet
