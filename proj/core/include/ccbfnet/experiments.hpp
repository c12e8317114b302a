#pragma once

#include <string>
#include <vector>

#include "ccbfnet/config.hpp"
#include "ccbfnet/csv.hpp"

namespace ccbfnet {

struct CommandResult {
    int exit_code = 0;  // 0 ok, 3 runtime failure, 4 reproduction mismatch
    std::string summary;
    std::vector<std::string> outputs;  // paths written, relative to the out dir
};

/// Closed-loop run for kind = simulate.
Trajectory run_simulate_data(const ExperimentConfig& cfg);

/// Resilience boundary of the swept node over the x grid, other nodes fixed
/// (kind = nu-star-sweep). Grid points where the control-effect assumption
/// fails (zero L_g h) are recorded as 0 with the ill_posed flag.
std::vector<NuStarRow> run_nu_star_data(const ExperimentConfig& cfg);

struct SurfaceData {
    std::vector<double> xs;
    std::vector<double> nus;
    std::vector<std::vector<double>> epsilon;  // [nu index][x index]
};

/// Non-compliance tolerance over the x/nu grid (kind = epsilon-surface).
SurfaceData run_surface_data(const ExperimentConfig& cfg);

CommandResult cmd_simulate(const ExperimentConfig& cfg);
CommandResult cmd_nu_star_sweep(const ExperimentConfig& cfg);
CommandResult cmd_epsilon_surface(const ExperimentConfig& cfg);

/// Runs the shipped configuration for one of the four reference figures and
/// verifies its summary statistics; a mismatch yields exit code 4.
CommandResult cmd_reproduce(int figure, const std::string& out_dir, bool write_csv,
                            bool write_svg);

/// Embedded configuration text for figure 1..4.
const char* shipped_config(int figure);

/// FNV-1a 64-bit hash of the configuration text, as "fnv1a64:<hex>".
std::string config_hash(const std::string& text);

/// Worker count for grid sweeps: hardware concurrency capped by the
/// CCBFNET_THREADS environment variable and by the job count.
int sweep_thread_count(std::size_t jobs);

}  // namespace ccbfnet
