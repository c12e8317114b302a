#include "ccbfnet/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace ccbfnet {

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(join(issues)), issues_(std::move(issues)) {}

std::string ConfigError::join(const std::vector<std::string>& issues) {
    std::string all = "configuration errors:";
    for (const auto& s : issues) all += "\n  " + s;
    return all;
}

std::vector<double> GridSpec::points() const {
    std::vector<double> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        pts.push_back(lo + f * (hi - lo));
    }
    return pts;
}

namespace {

struct RawEntry {
    int line = 0;
    std::string value;
};

struct RawConfig {
    // section -> key -> entries (repeatable keys keep every entry)
    std::map<std::string, std::map<std::string, std::vector<RawEntry>>> sections;
    std::map<std::string, int> section_lines;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"network", {"beta", "gamma", "x0"}},
    {"safety", {"xbar", "eta", "kappa"}},
    {"control", {"lo", "hi", "event"}},
    {"sim", {"t_end", "dt", "control_period", "derivative_policy", "delta_nu", "nu_max"}},
    {"experiment", {"kind", "node", "x_fixed", "x_grid", "nu_grid", "figure"}},
    {"output", {"directory", "formats"}},
};

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExperimentConfig parse();

private:
    void scan();
    void fail(int line, const std::string& msg) {
        issues_.push_back("line " + std::to_string(line) + ": " + msg);
    }
    void fail(const std::string& msg) { issues_.push_back(msg); }

    const std::vector<RawEntry>* entries(const std::string& section, const std::string& key) {
        auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    /// Single-valued key (last occurrence would be ambiguous; repeats are errors).
    std::optional<RawEntry> single(const std::string& section, const std::string& key) {
        const auto* e = entries(section, key);
        if (!e) return std::nullopt;
        if (e->size() > 1) {
            fail((*e)[1].line, "duplicate key '" + key + "' in [" + section + "]");
            return std::nullopt;
        }
        return (*e)[0];
    }

    std::vector<double> numbers(const RawEntry& e, const std::string& what) {
        std::vector<double> vals;
        std::istringstream in(e.value);
        std::string tok;
        while (in >> tok) {
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                vals.push_back(v);
            } catch (const std::exception&) {
                fail(e.line, what + ": '" + tok + "' is not a number");
                return {};
            }
        }
        if (vals.empty()) fail(e.line, what + ": expected at least one number");
        return vals;
    }

    /// Length-1 lists broadcast to n entries.
    std::optional<Vec> node_list(const std::string& section, const std::string& key, int n,
                                 bool required) {
        const auto e = single(section, key);
        if (!e) {
            if (required) fail("missing required key '" + key + "' in [" + section + "]");
            return std::nullopt;
        }
        auto vals = numbers(*e, key);
        if (vals.empty()) return std::nullopt;
        if (vals.size() == 1) vals.assign(n, vals[0]);
        if (static_cast<int>(vals.size()) != n) {
            fail(e->line, key + " needs 1 or " + std::to_string(n) +
                              " values (network size set by beta), got " +
                              std::to_string(vals.size()));
            return std::nullopt;
        }
        Vec v(n);
        for (int k = 0; k < n; ++k) v(k) = vals[k];
        return v;
    }

    const std::string& text_;
    RawConfig raw_;
    std::vector<std::string> issues_;
};

void Parser::scan() {
    std::istringstream in(text_);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(lineno, "malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!kKnownKeys.count(section)) {
                fail(lineno, "unknown section [" + section + "]");
                section.clear();
                continue;
            }
            raw_.section_lines.emplace(section, lineno);
            raw_.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(lineno, "expected 'key = value'");
            continue;
        }
        if (section.empty()) {
            fail(lineno, "key outside of any section");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& known = kKnownKeys.at(section);
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            fail(lineno, "unknown key '" + key + "' in [" + section + "]");
            continue;
        }
        raw_.sections[section][key].push_back({lineno, value});
    }
}

ExperimentConfig Parser::parse() {
    scan();
    for (const char* sec : {"network", "safety", "control", "experiment"})
        if (!raw_.sections.count(sec)) fail(std::string("missing required section [") + sec + "]");
    if (!issues_.empty()) throw ConfigError(std::move(issues_));

    ExperimentConfig cfg;
    cfg.raw_text = text_;

    // [network] beta fixes n.
    int n = 0;
    if (const auto beta_entry = single("network", "beta")) {
        std::vector<std::vector<double>> rows;
        std::string row_text;
        std::istringstream rows_in(beta_entry->value);
        while (std::getline(rows_in, row_text, ';')) {
            RawEntry row{beta_entry->line, row_text};
            auto vals = numbers(row, "beta row");
            if (!vals.empty()) rows.push_back(std::move(vals));
        }
        if (!rows.empty()) {
            n = static_cast<int>(rows.size());
            cfg.params.beta = Mat::Zero(n, n);
            for (int r = 0; r < n; ++r) {
                if (static_cast<int>(rows[r].size()) != n) {
                    fail(beta_entry->line, "beta must be square; row " + std::to_string(r + 1) +
                                               " has " + std::to_string(rows[r].size()) +
                                               " of " + std::to_string(n) + " entries");
                    break;
                }
                for (int c = 0; c < n; ++c) cfg.params.beta(r, c) = rows[r][c];
            }
        }
    } else {
        fail("missing required key 'beta' in [network]");
    }
    if (n == 0) throw ConfigError(std::move(issues_));

    if (const auto v = node_list("network", "gamma", n, true)) cfg.params.gamma = *v;
    if (const auto v = node_list("network", "x0", n, true)) cfg.x0 = *v;
    if (const auto v = node_list("safety", "xbar", n, true)) cfg.params.xbar = *v;
    Vec eta = Vec::Zero(n), kappa = Vec::Zero(n);
    if (const auto v = node_list("safety", "eta", n, true)) eta = *v;
    if (const auto v = node_list("safety", "kappa", n, true)) kappa = *v;
    Vec lo = Vec::Zero(n), hi = Vec::Zero(n);
    if (const auto v = node_list("control", "lo", n, true)) lo = *v;
    if (const auto v = node_list("control", "hi", n, true)) hi = *v;
    cfg.params.ubar = hi;

    // [control] events
    if (const auto* evs = entries("control", "event")) {
        for (const auto& e : *evs) {
            std::istringstream in(e.value);
            double time;
            std::string kind;
            if (!(in >> time >> kind)) {
                fail(e.line, "event needs '<time> box <lo> <hi>' or '<time> compliance <node> <rho>'");
                continue;
            }
            Event ev;
            ev.time = time;
            if (kind == "box") {
                if (!(in >> ev.box_lo >> ev.box_hi)) {
                    fail(e.line, "box event needs '<time> box <lo> <hi>'");
                    continue;
                }
                ev.kind = Event::Kind::control_box;
            } else if (kind == "compliance") {
                int node_1based;
                if (!(in >> node_1based >> ev.rho)) {
                    fail(e.line, "compliance event needs '<time> compliance <node> <rho>'");
                    continue;
                }
                if (node_1based < 1 || node_1based > n) {
                    fail(e.line, "compliance event names unknown node " +
                                     std::to_string(node_1based));
                    continue;
                }
                ev.kind = Event::Kind::compliance;
                ev.node = node_1based - 1;
            } else {
                fail(e.line, "unknown event kind '" + kind + "'");
                continue;
            }
            std::string extra;
            if (in >> extra) {
                fail(e.line, "trailing tokens after event: '" + extra + "'");
                continue;
            }
            cfg.scenario.events.push_back(ev);
        }
        std::stable_sort(cfg.scenario.events.begin(), cfg.scenario.events.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });
    }

    // [sim] - the only section with defaults.
    auto scalar_or = [&](const std::string& key, double fallback) {
        if (const auto e = single("sim", key)) {
            const auto vals = numbers(*e, key);
            if (vals.size() == 1) return vals[0];
            if (!vals.empty()) fail(e->line, key + " takes a single number");
        }
        return fallback;
    };
    cfg.scenario.t_end = scalar_or("t_end", 20.0);
    cfg.scenario.dt = scalar_or("dt", 0.01);
    cfg.scenario.control_period = scalar_or("control_period", 0.05);
    cfg.scenario.resilience_delta_nu = scalar_or("delta_nu", 0.01);
    cfg.scenario.resilience_nu_max = scalar_or("nu_max", 8.0);
    if (const auto e = single("sim", "derivative_policy")) {
        const std::string v = trim(e->value);
        if (v == "zero") {
            cfg.scenario.derivative_policy.mode = DerivativePolicy::Mode::zero;
        } else if (v == "backward-difference") {
            cfg.scenario.derivative_policy.mode = DerivativePolicy::Mode::backward_difference;
        } else if (v.rfind("affine-decay:", 0) == 0) {
            cfg.scenario.derivative_policy.mode = DerivativePolicy::Mode::affine_decay;
            try {
                cfg.scenario.derivative_policy.lambda = std::stod(v.substr(13));
            } catch (const std::exception&) {
                fail(e->line, "affine-decay needs a numeric rate, e.g. affine-decay:0.5");
            }
        } else {
            fail(e->line, "derivative_policy must be zero, backward-difference or "
                          "affine-decay:<rate>");
        }
    }

    // [experiment]
    if (const auto e = single("experiment", "kind")) {
        const std::string v = trim(e->value);
        if (v == "simulate") cfg.kind = ExperimentKind::simulate;
        else if (v == "nu-star-sweep") cfg.kind = ExperimentKind::nu_star_sweep;
        else if (v == "epsilon-surface") cfg.kind = ExperimentKind::epsilon_surface;
        else if (v == "reproduce") cfg.kind = ExperimentKind::reproduce;
        else fail(e->line, "unknown experiment kind '" + v + "'");
    } else {
        fail("missing required key 'kind' in [experiment]");
    }

    auto grid = [&](const std::string& key, bool required) {
        GridSpec g;
        if (const auto e = single("experiment", key)) {
            const auto vals = numbers(*e, key);
            if (vals.size() == 3 && vals[2] >= 1 && vals[2] == std::floor(vals[2]) &&
                vals[1] >= vals[0]) {
                g.lo = vals[0];
                g.hi = vals[1];
                g.count = static_cast<int>(vals[2]);
            } else {
                fail(e->line, key + " needs '<lo> <hi> <count>' with lo <= hi and integral "
                                    "count >= 1");
            }
        } else if (required) {
            fail("missing required key '" + key + "' in [experiment]");
        }
        return g;
    };

    const bool sweep_like = cfg.kind == ExperimentKind::nu_star_sweep ||
                            cfg.kind == ExperimentKind::epsilon_surface;
    if (sweep_like) {
        if (const auto e = single("experiment", "node")) {
            const auto vals = numbers(*e, "node");
            if (vals.size() == 1 && vals[0] >= 1 && vals[0] <= n &&
                vals[0] == std::floor(vals[0])) {
                cfg.node = static_cast<int>(vals[0]) - 1;
            } else {
                fail(e->line, "node must be an id in 1.." + std::to_string(n));
            }
        } else {
            fail("missing required key 'node' in [experiment]");
        }
        if (const auto e = single("experiment", "x_fixed")) {
            const auto vals = numbers(*e, "x_fixed");
            if (static_cast<int>(vals.size()) != n - 1) {
                fail(e->line, "x_fixed needs " + std::to_string(n - 1) +
                                  " values (one per non-swept node)");
            } else {
                cfg.x_fixed = Vec(n - 1);
                for (int k = 0; k < n - 1; ++k) cfg.x_fixed(k) = vals[k];
            }
        } else {
            fail("missing required key 'x_fixed' in [experiment]");
        }
        cfg.x_grid = grid("x_grid", true);
        if (cfg.kind == ExperimentKind::epsilon_surface) cfg.nu_grid = grid("nu_grid", true);
    }
    if (cfg.kind == ExperimentKind::reproduce) {
        if (const auto e = single("experiment", "figure")) {
            const auto vals = numbers(*e, "figure");
            if (vals.size() == 1 && vals[0] >= 1 && vals[0] <= 4 &&
                vals[0] == std::floor(vals[0]))
                cfg.figure = static_cast<int>(vals[0]);
            else
                fail(e->line, "figure must be 1, 2, 3 or 4");
        } else {
            fail("missing required key 'figure' in [experiment] for kind = reproduce");
        }
    }

    // [output]
    if (const auto e = single("output", "directory")) cfg.directory = trim(e->value);
    if (const auto e = single("output", "formats")) {
        cfg.write_csv = false;
        cfg.write_svg = false;
        std::string fmt;
        std::istringstream in(e->value);
        while (std::getline(in, fmt, ',')) {
            fmt = trim(fmt);
            if (fmt == "csv") cfg.write_csv = true;
            else if (fmt == "svg") cfg.write_svg = true;
            else fail(e->line, "unknown output format '" + fmt + "' (csv, svg)");
        }
    }

    if (!issues_.empty()) throw ConfigError(std::move(issues_));

    // Semantic validation through the owning types.
    cfg.scenario.gains.clear();
    for (int i = 0; i < n; ++i) cfg.scenario.gains.push_back({eta(i), kappa(i)});
    try {
        cfg.params.validate();
        const NetworkGraph graph = cfg.params.graph();
        cfg.scenario.box.lo.clear();
        cfg.scenario.box.hi.clear();
        for (int i = 0; i < n; ++i) {
            cfg.scenario.box.lo.push_back(Vec::Constant(1, lo(i)));
            cfg.scenario.box.hi.push_back(Vec::Constant(1, hi(i)));
        }
        cfg.scenario.validate(graph);
    } catch (const Error& err) {
        fail(err.what());
        throw ConfigError(std::move(issues_));
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    return Parser(text).parse();
}

}  // namespace ccbfnet
