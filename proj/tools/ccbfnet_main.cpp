// Command-line front end: config-driven simulation runs, resilience-boundary
// sweeps, tolerance surfaces and one-shot reproduction of the four reference
// figures. Exit codes: 0 success, 2 configuration error, 3 runtime
// infeasibility or integration failure, 4 reproduction-summary mismatch.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ccbfnet/config.hpp"
#include "ccbfnet/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ccbfnet::ConfigError({"cannot read config file: " + path});
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string formats;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides [output])");
    cmd->add_option("--formats", flags.formats,
                    "comma-separated outputs: csv,svg (overrides [output])");
}

ccbfnet::ExperimentConfig load(const CommonFlags& flags) {
    auto cfg = ccbfnet::parse_config(read_file(flags.config_path));
    if (!flags.out_dir.empty()) cfg.directory = flags.out_dir;
    if (!flags.formats.empty()) {
        cfg.write_csv = flags.formats.find("csv") != std::string::npos;
        cfg.write_svg = flags.formats.find("svg") != std::string::npos;
    }
    return cfg;
}

int finish(const ccbfnet::CommandResult& res) {
    std::cout << res.summary << "\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collaborative safety experiments for networked SIS control"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, surface_flags, repro_flags;
    int figure = 0;

    auto* sim = app.add_subcommand("simulate", "closed-loop run, trajectory CSV/SVG");
    add_common(sim, sim_flags, true);
    auto* sweep = app.add_subcommand("nu-star-sweep", "resilience boundary over a state grid");
    add_common(sweep, sweep_flags, true);
    auto* surface =
        app.add_subcommand("epsilon-surface", "non-compliance tolerance over a grid");
    add_common(surface, surface_flags, true);
    auto* repro = app.add_subcommand("reproduce", "run a shipped reference-figure config");
    add_common(repro, repro_flags, false);
    repro->add_option("--figure", figure, "figure id, 1-4")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return finish(ccbfnet::cmd_simulate(load(sim_flags)));
        if (sweep->parsed()) return finish(ccbfnet::cmd_nu_star_sweep(load(sweep_flags)));
        if (surface->parsed())
            return finish(ccbfnet::cmd_epsilon_surface(load(surface_flags)));
        if (repro->parsed()) {
            std::string out = repro_flags.out_dir.empty() ? "out" : repro_flags.out_dir;
            bool csv = true, svg = false;
            if (!repro_flags.formats.empty()) {
                csv = repro_flags.formats.find("csv") != std::string::npos;
                svg = repro_flags.formats.find("svg") != std::string::npos;
            }
            return finish(ccbfnet::cmd_reproduce(figure, out, csv, svg));
        }
    } catch (const ccbfnet::ConfigError& err) {
        std::cerr << err.what() << "\n";
        return kExitConfig;
    } catch (const ccbfnet::ArgumentError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const ccbfnet::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
