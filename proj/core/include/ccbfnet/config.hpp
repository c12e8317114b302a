#pragma once

#include <string>
#include <vector>

#include "ccbfnet/errors.hpp"
#include "ccbfnet/sim.hpp"
#include "ccbfnet/sis.hpp"

namespace ccbfnet {

/// Parse failure carrying every issue found, each prefixed "line N:".
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues);
    std::vector<std::string> issues_;
};

enum class ExperimentKind { simulate, nu_star_sweep, epsilon_surface, reproduce };

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    std::vector<double> points() const;
};

/// Fully validated experiment description. See docs/config-format.md for the
/// grammar. Defaults exist only for [sim] keys; [output] is plumbing that
/// command-line flags may override.
struct ExperimentConfig {
    SISParams params;
    Vec x0;
    Scenario scenario;

    ExperimentKind kind = ExperimentKind::simulate;
    NodeId node = 0;  // 0-based; sweep/surface target
    Vec x_fixed;      // states of the non-swept nodes, ascending id
    GridSpec x_grid;
    GridSpec nu_grid;
    int figure = 0;

    std::string directory = "out";
    bool write_csv = true;
    bool write_svg = false;

    std::string raw_text;  // exact input, for hashing
};

ExperimentConfig parse_config(const std::string& text);

}  // namespace ccbfnet
