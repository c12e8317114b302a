#include "ccbfnet/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ccbfnet/errors.hpp"
#include "ccbfnet/svg.hpp"

namespace ccbfnet {

namespace {

using nlohmann::json;

const char* const kNodeColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const int workers = sweep_thread_count(jobs);
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k; (k = next.fetch_add(1)) < jobs;) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Full network state for a sweep: the swept node takes `x_sweep`, the
/// remaining nodes take cfg.x_fixed in ascending id order.
NetworkState sweep_state(const ExperimentConfig& cfg, const NetworkGraph& graph,
                         double x_sweep) {
    Vec flat(graph.total_state_dim());
    int fixed_at = 0;
    for (int i = 0; i < graph.size(); ++i) {
        if (i == cfg.node)
            flat(graph.state_offset(i)) = x_sweep;
        else
            flat(graph.state_offset(i)) = cfg.x_fixed(fixed_at++);
    }
    return NetworkState(graph, flat);
}

struct SweepPoint {
    NuStarResult ns;
    bool ill_posed = false;
    LieBundle bundle;
    ControlDerivative deriv;
    AllowedActionSet allowed{Vec::Zero(1), Vec::Zero(1)};
};

SweepPoint evaluate_sweep_point(const ExperimentConfig& cfg, const NetworkGraph& graph,
                                const DynamicsModel& model, const BarrierSpec& barrier,
                                double x_sweep) {
    SweepPoint pt;
    const NetworkState state = sweep_state(cfg, graph, x_sweep);
    pt.bundle = lie_bundle(model, barrier, graph, state, cfg.node);
    pt.deriv = cfg.scenario.derivative_policy.make(
        graph.control_dim(cfg.node), Vec::Zero(graph.control_dim(cfg.node)),
        cfg.scenario.control_period);
    pt.allowed = AllowedActionSet(cfg.scenario.box.lo[cfg.node],
                                  cfg.scenario.box.hi[cfg.node]);
    try {
        pt.ns = find_nu_star({pt.bundle, pt.allowed, pt.deriv},
                             cfg.scenario.resilience_delta_nu,
                             cfg.scenario.resilience_nu_max);
    } catch (const IllPosedError&) {
        // Zero L_g h: every action maximizes the linear objective, so the
        // capability argmax trivially belongs to the linear argmax set.
        pt.ill_posed = true;
        pt.ns = NuStarResult{0.0, false, true};
    }
    return pt;
}

std::filesystem::path ensure_out_dir(const std::string& directory) {
    std::filesystem::path dir(directory);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const ExperimentConfig& cfg, const std::vector<std::string>& outputs,
                    const json& summary, int figure = 0) {
    json m;
    m["command"] = command;
    if (figure > 0) m["figure"] = figure;
    m["config_hash"] = config_hash(cfg.raw_text);
    m["seed"] = 0;  // runs are deterministic; reserved for future stochastic inputs
    m["outputs"] = outputs;
    m["summary"] = summary;
    write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

struct SimulateSummary {
    std::vector<double> first_violation;  // per node; <0 when none
    std::vector<double> min_h;
    std::string oneline;
};

SimulateSummary summarize(const Trajectory& traj, int n) {
    SimulateSummary s;
    s.first_violation.assign(n, -1.0);
    s.min_h.assign(n, std::numeric_limits<double>::infinity());
    for (const auto& sample : traj.samples) {
        for (int i = 0; i < n; ++i) {
            s.min_h[i] = std::min(s.min_h[i], sample.h[i]);
            if (sample.h[i] < 0.0 && s.first_violation[i] < 0.0)
                s.first_violation[i] = sample.t;
        }
    }
    std::string line;
    for (int i = 0; i < n; ++i) {
        if (s.first_violation[i] >= 0.0) {
            if (!line.empty()) line += "; ";
            line += "node " + std::to_string(i + 1) + " violates at t = " +
                    format_number(s.first_violation[i]);
        }
    }
    s.oneline = line.empty() ? "no violations" : line;
    return s;
}

std::vector<std::string> write_simulate_outputs(const ExperimentConfig& cfg,
                                                const Trajectory& traj,
                                                const std::filesystem::path& dir,
                                                bool write_csv, bool write_svg) {
    std::vector<std::string> outputs;
    if (write_csv) {
        write_text_file((dir / "trajectory.csv").string(), trajectory_csv(traj));
        outputs.push_back("trajectory.csv");
        write_text_file((dir / "resilience.csv").string(), resilience_csv(traj));
        outputs.push_back("resilience.csv");
    }
    if (write_svg && !traj.samples.empty()) {
        const int n = static_cast<int>(traj.samples.front().state.size());
        std::vector<double> ts;
        for (const auto& s : traj.samples) ts.push_back(s.t);
        double x_hi = 0.0, u_hi = 0.0;
        for (const auto& s : traj.samples)
            for (int i = 0; i < n; ++i) {
                x_hi = std::max(x_hi, s.state[i](0));
                u_hi = std::max({u_hi, s.control[i](0), s.hi[i](0)});
            }
        SvgPlot states(ts.front(), ts.back(), 0.0, 1.1 * x_hi, "t", "x_i",
                       "infected fraction");
        SvgPlot controls(ts.front(), ts.back(), 0.0, 1.1 * u_hi, "t", "u_i",
                         "applied control");
        for (int i = 0; i < n; ++i) {
            const std::string color = kNodeColors[i % 6];
            std::vector<double> xs, us;
            for (const auto& s : traj.samples) {
                xs.push_back(s.state[i](0));
                us.push_back(s.control[i](0));
            }
            states.polyline(ts, xs, color, false, "x_" + std::to_string(i + 1));
            states.horizontal_line(cfg.params.xbar(i), color, true);
            controls.polyline(ts, us, color, false, "u_" + std::to_string(i + 1));
        }
        std::vector<double> bound;
        for (const auto& s : traj.samples) bound.push_back(s.hi[0](0));
        controls.step_line(ts, bound, "#000000", true, "bound");
        write_text_file((dir / "trajectory_states.svg").string(), states.render());
        outputs.push_back("trajectory_states.svg");
        write_text_file((dir / "trajectory_controls.svg").string(), controls.render());
        outputs.push_back("trajectory_controls.svg");
    }
    return outputs;
}

std::vector<std::string> write_sweep_outputs(const std::vector<NuStarRow>& rows,
                                             const std::filesystem::path& dir,
                                             bool write_csv, bool write_svg) {
    std::vector<std::string> outputs;
    if (write_csv) {
        write_text_file((dir / "nu_star.csv").string(), nu_star_csv(rows));
        outputs.push_back("nu_star.csv");
    }
    if (write_svg && !rows.empty()) {
        std::vector<double> xs, ys;
        double y_hi = 0.0;
        for (const auto& r : rows) {
            xs.push_back(r.x);
            ys.push_back(r.nu_star);
            y_hi = std::max(y_hi, r.nu_star);
        }
        SvgPlot plot(xs.front(), xs.back(), 0.0, std::max(y_hi * 1.1, 0.1), "x",
                     "nu_star", "resilience boundary");
        plot.step_line(xs, ys, kNodeColors[0], false, "nu_star");
        write_text_file((dir / "nu_star.svg").string(), plot.render());
        outputs.push_back("nu_star.svg");
    }
    return outputs;
}

std::vector<std::string> write_surface_outputs(const SurfaceData& data,
                                               const std::filesystem::path& dir,
                                               bool write_csv, bool write_svg) {
    std::vector<std::string> outputs;
    if (write_csv) {
        std::vector<EpsilonRow> rows;
        for (std::size_t r = 0; r < data.nus.size(); ++r)
            for (std::size_t c = 0; c < data.xs.size(); ++c)
                rows.push_back({data.xs[c], data.nus[r], data.epsilon[r][c]});
        write_text_file((dir / "epsilon_surface.csv").string(), epsilon_surface_csv(rows));
        outputs.push_back("epsilon_surface.csv");
    }
    if (write_svg && !data.xs.empty() && !data.nus.empty()) {
        write_text_file((dir / "epsilon_surface.svg").string(),
                        contour_svg(data.xs, data.nus, data.epsilon, "x", "nu",
                                    "non-compliance tolerance"));
        outputs.push_back("epsilon_surface.svg");
    }
    return outputs;
}

}  // namespace

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

int sweep_thread_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    int cap = static_cast<int>(hw);
    if (const char* env = std::getenv("CCBFNET_THREADS")) {
        try {
            cap = std::max(1, std::min(cap, std::stoi(env)));
        } catch (const std::exception&) {
            // Unparsable values fall back to hardware concurrency.
        }
    }
    return std::max(1, std::min<int>(cap, static_cast<int>(jobs)));
}

Trajectory run_simulate_data(const ExperimentConfig& cfg) {
    const NetworkGraph graph = cfg.params.graph();
    const DynamicsModel model = sis_dynamics(cfg.params);
    std::vector<BarrierSpec> barriers;
    for (int i = 0; i < graph.size(); ++i) barriers.push_back(sis_barrier(cfg.params, i));
    return run(graph, model, barriers, cfg.scenario, NetworkState(graph, cfg.x0));
}

std::vector<NuStarRow> run_nu_star_data(const ExperimentConfig& cfg) {
    const NetworkGraph graph = cfg.params.graph();
    const DynamicsModel model = sis_dynamics(cfg.params);
    const BarrierSpec barrier = sis_barrier(cfg.params, cfg.node);
    const std::vector<double> grid = cfg.x_grid.points();
    std::vector<NuStarRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        const auto pt = evaluate_sweep_point(cfg, graph, model, barrier, grid[k]);
        rows[k] = {grid[k], pt.ns.nu_star, pt.ns.saturated, pt.ns.contiguous, pt.ill_posed};
    });
    return rows;
}

SurfaceData run_surface_data(const ExperimentConfig& cfg) {
    const NetworkGraph graph = cfg.params.graph();
    const DynamicsModel model = sis_dynamics(cfg.params);
    const BarrierSpec barrier = sis_barrier(cfg.params, cfg.node);
    SurfaceData data;
    data.xs = cfg.x_grid.points();
    data.nus = cfg.nu_grid.points();
    data.epsilon.assign(data.nus.size(), std::vector<double>(data.xs.size(), 0.0));
    parallel_for(data.xs.size(), [&](std::size_t c) {
        const auto pt = evaluate_sweep_point(cfg, graph, model, barrier, data.xs[c]);
        if (pt.ill_posed || pt.ns.saturated) {
            // No meaningful boundary: record zero tolerance down the column.
            return;
        }
        const auto u_star = maximize_linear(pt.bundle.lg_h, pt.allowed);
        for (std::size_t r = 0; r < data.nus.size(); ++r) {
            const double nu = data.nus[r];
            if (nu >= pt.ns.nu_star) continue;  // zero tolerance above the boundary
            const auto obj = QuadraticObjective::from_bundle(pt.bundle, nu, pt.deriv);
            const auto u_c = maximize_capability(obj, pt.allowed);
            data.epsilon[r][c] = epsilon_tolerance(pt.bundle, pt.deriv, nu, pt.ns.nu_star,
                                                   u_star.u_star, u_c.u_star);
        }
    });
    return data;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::simulate)
        throw ConfigError({"simulate requires [experiment] kind = simulate"});
    const auto dir = ensure_out_dir(cfg.directory);
    const Trajectory traj = run_simulate_data(cfg);
    const auto outputs = write_simulate_outputs(cfg, traj, dir, cfg.write_csv, cfg.write_svg);
    const auto s = summarize(traj, cfg.params.n());

    json summary;
    summary["status"] = traj.ok() ? "ok" : "aborted";
    if (!traj.ok()) summary["diagnostic"] = traj.diagnostic;
    summary["first_violation"] = s.first_violation;
    summary["min_h"] = s.min_h;
    summary["negotiation_failures"] = traj.negotiation_failures;
    summary["clamp_events"] = traj.clamp_events;
    write_manifest(dir, "simulate", cfg, outputs, summary);

    CommandResult res;
    res.outputs = outputs;
    res.summary = s.oneline;
    if (!traj.ok()) {
        res.exit_code = 3;
        res.summary = "aborted: " + traj.diagnostic;
    }
    return res;
}

CommandResult cmd_nu_star_sweep(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::nu_star_sweep)
        throw ConfigError({"nu-star-sweep requires [experiment] kind = nu-star-sweep"});
    const auto dir = ensure_out_dir(cfg.directory);
    const auto rows = run_nu_star_data(cfg);
    const auto outputs = write_sweep_outputs(rows, dir, cfg.write_csv, cfg.write_svg);

    int saturated = 0, ill_posed = 0;
    double peak = 0.0;
    for (const auto& r : rows) {
        saturated += r.saturated ? 1 : 0;
        ill_posed += r.ill_posed ? 1 : 0;
        peak = std::max(peak, r.nu_star);
    }
    json summary;
    summary["rows"] = rows.size();
    summary["max_nu_star"] = peak;
    summary["saturated_rows"] = saturated;
    summary["ill_posed_rows"] = ill_posed;
    write_manifest(dir, "nu-star-sweep", cfg, outputs, summary);

    CommandResult res;
    res.outputs = outputs;
    res.summary = "nu_star max = " + format_number(peak) + " over " +
                  std::to_string(rows.size()) + " grid points" +
                  (saturated ? " (" + std::to_string(saturated) + " saturated)" : "");
    return res;
}

CommandResult cmd_epsilon_surface(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::epsilon_surface)
        throw ConfigError({"epsilon-surface requires [experiment] kind = epsilon-surface"});
    const auto dir = ensure_out_dir(cfg.directory);
    const auto data = run_surface_data(cfg);
    const auto outputs = write_surface_outputs(data, dir, cfg.write_csv, cfg.write_svg);

    double peak = 0.0;
    for (const auto& row : data.epsilon)
        for (double v : row) peak = std::max(peak, v);
    json summary;
    summary["grid"] = {data.xs.size(), data.nus.size()};
    summary["max_epsilon"] = peak;
    write_manifest(dir, "epsilon-surface", cfg, outputs, summary);

    CommandResult res;
    res.outputs = outputs;
    res.summary = "epsilon max = " + format_number(peak) + " on a " +
                  std::to_string(data.xs.size()) + "x" + std::to_string(data.nus.size()) +
                  " grid";
    return res;
}

namespace {

struct FigureCheck {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

FigureCheck check_figure_1(const Trajectory& traj) {
    FigureCheck c;
    c.require(traj.ok(), "run aborted");
    if (!traj.ok()) return c;
    bool violated_after = false;
    for (const auto& s : traj.samples) {
        if (s.t < 10.0) c.require(s.h[0] >= 0.0, "node 1 unsafe before the failure");
        if (s.t > 10.0 && s.h[0] < 0.0) violated_after = true;
        c.require(s.h[1] >= 0.0 && s.h[2] >= 0.0, "node 2 or 3 became unsafe");
    }
    c.require(violated_after, "node 1 never violated its constraint after the failure");
    return c;
}

FigureCheck check_figure_2(const Trajectory& traj) {
    FigureCheck c;
    c.require(traj.ok(), "run aborted");
    if (!traj.ok()) return c;
    for (const auto& s : traj.samples)
        for (double h : s.h) c.require(h >= -1e-6, "a node violated its constraint");
    return c;
}

FigureCheck check_figure_3(const std::vector<NuStarRow>& rows) {
    FigureCheck c;
    c.require(!rows.empty(), "empty sweep");
    if (rows.empty()) return c;
    c.require(rows.front().nu_star == 0.0, "no initial zero segment");
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        c.require(rows[k + 1].nu_star >= rows[k].nu_star - 1e-12,
                  "nu_star decreased between adjacent grid points");
    for (const auto& r : rows) c.require(!r.saturated, "a sweep row saturated");
    return c;
}

FigureCheck check_figure_4(const SurfaceData& data) {
    FigureCheck c;
    const std::size_t cols = data.xs.size(), rows = data.nus.size();
    c.require(cols > 1 && rows > 1, "degenerate grid");
    if (!c.pass) return c;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t col = 0; col < cols; ++col)
            c.require(data.epsilon[r][col] >= 0.0, "negative tolerance value");
    for (std::size_t col = 0; col < cols; ++col)
        for (std::size_t r = 0; r + 1 < rows; ++r)
            c.require(data.epsilon[r + 1][col] <= data.epsilon[r][col] + 1e-9,
                      "tolerance increased with nu at fixed x");
    // Monotone in x from some grid column onward, uniformly across nu rows.
    std::size_t from = 0;
    for (std::size_t col = 0; col + 1 < cols; ++col) {
        bool ok = true;
        for (std::size_t r = 0; r < rows && ok; ++r)
            for (std::size_t cc = col; cc + 1 < cols && ok; ++cc)
                ok = data.epsilon[r][cc + 1] >= data.epsilon[r][cc] - 1e-9;
        if (ok) {
            from = col;
            break;
        }
        if (col + 2 == cols) {
            c.require(false, "no column from which tolerance is nondecreasing in x");
            return c;
        }
    }
    c.detail = "monotone in x from column " + std::to_string(from);
    return c;
}

}  // namespace

CommandResult cmd_reproduce(int figure, const std::string& out_dir, bool write_csv,
                            bool write_svg) {
    if (figure < 1 || figure > 4)
        throw ArgumentError("reproduce: unknown figure id " + std::to_string(figure));
    ExperimentConfig cfg = parse_config(shipped_config(figure));
    cfg.directory = out_dir;
    cfg.write_csv = write_csv;
    cfg.write_svg = write_svg;
    const auto dir = ensure_out_dir(cfg.directory);

    CommandResult res;
    FigureCheck check;
    json summary;
    std::vector<std::string> outputs;
    if (figure == 1 || figure == 2) {
        cfg.kind = ExperimentKind::simulate;
        const Trajectory traj = run_simulate_data(cfg);
        outputs = write_simulate_outputs(cfg, traj, dir, cfg.write_csv, cfg.write_svg);
        const auto s = summarize(traj, cfg.params.n());
        summary["status"] = traj.ok() ? "ok" : "aborted";
        summary["first_violation"] = s.first_violation;
        summary["min_h"] = s.min_h;
        check = figure == 1 ? check_figure_1(traj) : check_figure_2(traj);
        res.summary = s.oneline;
        if (!traj.ok()) {
            res.exit_code = 3;
            res.summary = "aborted: " + traj.diagnostic;
        }
    } else if (figure == 3) {
        const auto rows = run_nu_star_data(cfg);
        outputs = write_sweep_outputs(rows, dir, cfg.write_csv, cfg.write_svg);
        double peak = 0.0;
        for (const auto& r : rows) peak = std::max(peak, r.nu_star);
        summary["rows"] = rows.size();
        summary["max_nu_star"] = peak;
        check = check_figure_3(rows);
        res.summary = "nu_star max = " + format_number(peak);
    } else {
        const auto data = run_surface_data(cfg);
        outputs = write_surface_outputs(data, dir, cfg.write_csv, cfg.write_svg);
        double peak = 0.0;
        for (const auto& row : data.epsilon)
            for (double v : row) peak = std::max(peak, v);
        summary["max_epsilon"] = peak;
        check = check_figure_4(data);
        res.summary = "epsilon max = " + format_number(peak);
    }

    summary["check"] = check.pass ? "pass" : "fail";
    if (!check.detail.empty()) summary["check_detail"] = check.detail;
    write_manifest(dir, "reproduce", cfg, outputs, summary, figure);
    res.outputs = outputs;
    if (res.exit_code == 0 && !check.pass) {
        res.exit_code = 4;
        res.summary += " [summary mismatch: " + check.detail + "]";
    }
    return res;
}

namespace {

const char* const kConfigFig1 = R"cfg(# Reference scenario, conservative late-acting gains.
[network]
beta = 0.5 0.25 0.25 ; 0.25 0.5 0.25 ; 0.25 0.25 0.5
gamma = 0.3
x0 = 0.04 0.01 0.02

[safety]
xbar = 0.1 0.12 0.18
eta = 10
kappa = 1

[control]
lo = 0
hi = 0.75
event = 10 box 0 0.6

[sim]
t_end = 20
dt = 0.01
control_period = 0.05
nu_max = 2

[experiment]
kind = simulate
)cfg";

const char* const kConfigFig2 = R"cfg(# Reference scenario, early-acting gains.
[network]
beta = 0.5 0.25 0.25 ; 0.25 0.5 0.25 ; 0.25 0.25 0.5
gamma = 0.3
x0 = 0.04 0.01 0.02

[safety]
xbar = 0.1 0.12 0.18
eta = 0.3
kappa = 0.3

[control]
lo = 0
hi = 0.75
event = 10 box 0 0.6

[sim]
t_end = 20
dt = 0.01
control_period = 0.05
nu_max = 2

[experiment]
kind = simulate
)cfg";

const char* const kConfigFig3 = R"cfg(# Resilience boundary of node 1 with both neighbors held at 0.1.
[network]
beta = 0.5 0.25 0.25 ; 0.25 0.5 0.25 ; 0.25 0.25 0.5
gamma = 0.3
x0 = 0.04 0.01 0.02

[safety]
xbar = 0.1 0.12 0.18
eta = 0.3
kappa = 0.3

[control]
lo = 0
hi = 0.75

[sim]
delta_nu = 0.01
nu_max = 2

[experiment]
kind = nu-star-sweep
node = 1
x_fixed = 0.1 0.1
x_grid = 0 0.1 101
)cfg";

const char* const kConfigFig4 = R"cfg(# Non-compliance tolerance of node 1 with both neighbors held at 0.1.
[network]
beta = 0.5 0.25 0.25 ; 0.25 0.5 0.25 ; 0.25 0.25 0.5
gamma = 0.3
x0 = 0.04 0.01 0.02

[safety]
xbar = 0.1 0.12 0.18
eta = 0.3
kappa = 0.3

[control]
lo = 0
hi = 0.75

[sim]
delta_nu = 0.01
nu_max = 2

[experiment]
kind = epsilon-surface
node = 1
x_fixed = 0.1 0.1
x_grid = 0 0.1 50
nu_grid = 0 0.8 50
)cfg";

}  // namespace

const char* shipped_config(int figure) {
    switch (figure) {
        case 1: return kConfigFig1;
        case 2: return kConfigFig2;
        case 3: return kConfigFig3;
        case 4: return kConfigFig4;
        default: throw ArgumentError("shipped_config: unknown figure id");
    }
}

}  // namespace ccbfnet
