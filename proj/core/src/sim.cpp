#include "ccbfnet/sim.hpp"

#include <algorithm>
#include <cmath>

#include "ccbfnet/errors.hpp"

namespace ccbfnet {

ControlDerivative DerivativePolicy::make(int control_dim, const Vec& u_prev,
                                         double period) const {
    switch (mode) {
        case Mode::zero:
            return ControlDerivative::zero(control_dim);
        case Mode::affine_decay:
            return ControlDerivative::decay(control_dim, lambda);
        case Mode::backward_difference:
            return ControlDerivative::backward(u_prev, period);
    }
    throw ArgumentError("DerivativePolicy: unknown mode");
}

void Scenario::validate(const NetworkGraph& graph) const {
    if (!(dt > 0.0) || !(dt <= control_period) || !(control_period <= t_end))
        throw ArgumentError("Scenario: need 0 < dt <= control_period <= t_end");
    const double steps = control_period / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ArgumentError("Scenario: control_period must be a multiple of dt");
    const double periods = t_end / control_period;
    if (std::abs(periods - std::round(periods)) > 1e-9)
        throw ArgumentError("Scenario: t_end must be a multiple of control_period");
    for (std::size_t k = 1; k < events.size(); ++k)
        if (events[k].time < events[k - 1].time)
            throw ArgumentError("Scenario: event times must be sorted");
    for (const auto& ev : events) {
        if (ev.kind == Event::Kind::compliance) {
            if (ev.rho < 0.0 || ev.rho > 1.0)
                throw ArgumentError("Scenario: compliance factor must lie in [0, 1]");
            if (ev.node < 0 || ev.node >= graph.size())
                throw ArgumentError("Scenario: compliance event names an unknown node");
        } else if (ev.box_lo > ev.box_hi) {
            throw ArgumentError("Scenario: event box must satisfy lo <= hi");
        }
    }
    if (static_cast<int>(gains.size()) != graph.size())
        throw DimensionError("Scenario: need one gain pair per node");
    for (const auto& g : gains) g.validate();
    box.validate(graph);
    if (resilience_delta_nu <= 0.0 || resilience_nu_max <= 0.0)
        throw ArgumentError("Scenario: resilience grid parameters must be positive");
}

NetworkState rk4_step(const DynamicsModel& model, const NetworkGraph& graph,
                      const NetworkState& state, const std::vector<Vec>& controls,
                      double dt, double t_now) {
    if (dt <= 0.0) throw ArgumentError("rk4_step: dt must be positive");
    if (static_cast<int>(controls.size()) != graph.size())
        throw DimensionError("rk4_step: need one control per node");

    auto field = [&](const NetworkState& at) {
        Vec dot(at.total_dim());
        for (int i = 0; i < graph.size(); ++i) {
            const Vec f = model.drift(at, i) + model.input_map(at, i) * controls[i];
            dot.segment(graph.state_offset(i), graph.state_dim(i)) = f;
        }
        return dot;
    };

    const Vec k1 = field(state);
    NetworkState s2 = state;
    s2.flat() += 0.5 * dt * k1;
    const Vec k2 = field(s2);
    NetworkState s3 = state;
    s3.flat() += 0.5 * dt * k2;
    const Vec k3 = field(s3);
    NetworkState s4 = state;
    s4.flat() += dt * k3;
    const Vec k4 = field(s4);

    NetworkState next = state;
    next.flat() += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.flat().allFinite())
        throw IntegrationBlowupError("rk4_step: non-finite state", t_now + dt);
    return next;
}

ControlSelection select_control(const AllowedActionSet& allowed, const LieBundle& bundle,
                                const ClassKParams& gains) {
    const double affine = bundle.lf_h + gains.eta * bundle.h;
    const auto best = maximize_linear(bundle.lg_h, allowed);  // throws when empty
    ControlSelection sel;
    if (affine + best.value >= 0.0) {
        AllowedActionSet constrained = allowed;
        constrained.add_halfspace({bundle.lg_h, affine});
        sel.u = min_norm_point(constrained);
    } else {
        sel.u = best.u_star;
        sel.best_effort = true;
    }
    return sel;
}

ControlSelection select_control(const AllowedActionSet& allowed, const LieBundle& bundle,
                                const ClassKParams& gains, const SecondOrderCut& cut) {
    const double affine = bundle.lf_h + gains.eta * bundle.h;
    const auto best = maximize_linear(bundle.lg_h, allowed);
    ControlSelection sel;
    if (affine + best.value < 0.0) {
        sel.u = best.u_star;
        sel.best_effort = true;
        return sel;
    }
    AllowedActionSet constrained = allowed;
    constrained.add_halfspace({bundle.lg_h, affine});
    const Vec u0 = min_norm_point(constrained);
    auto own_psi2 = [&](const Vec& u) {
        return capability(bundle, gains, u, cut.deriv.eval(u)) + cut.promised;
    };
    if (own_psi2(u0) >= 0.0) {
        sel.u = u0;
        return sel;
    }
    const auto obj = QuadraticObjective::from_bundle(bundle, gains.nu(), cut.deriv);
    const Vec u1 = maximize_capability(obj, constrained).u_star;
    if (own_psi2(u1) < 0.0) {
        // The second-order condition is unsatisfiable this period even with
        // full committed assistance; take the capability maximizer.
        sel.u = u1;
        return sel;
    }
    // Smallest step along u0 -> u1 that restores the condition. The
    // capability restricted to the segment is an exact scalar quadratic.
    const Vec w = u1 - u0;
    const Mat qs = 0.5 * (bundle.lg2_h + bundle.lg2_h.transpose());
    const RowVec b_lin =
        bundle.lf_lg_h + bundle.lg_lf_h + gains.nu() * bundle.lg_h + bundle.lg_h * cut.deriv.D;
    const double a_coef = w.dot(qs * w);
    const double b_coef = 2.0 * u0.dot(qs * w) + b_lin.dot(w);
    const double c_coef = own_psi2(u0);
    double s_star = 1.0;
    if (std::abs(a_coef) < 1e-15) {
        if (std::abs(b_coef) > 1e-15) s_star = -c_coef / b_coef;
    } else {
        const double disc = b_coef * b_coef - 4.0 * a_coef * c_coef;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double r1 = (-b_coef - sq) / (2.0 * a_coef);
            const double r2 = (-b_coef + sq) / (2.0 * a_coef);
            const double lo = std::min(r1, r2), hi = std::max(r1, r2);
            // c_coef < 0 at s = 0; pick the first s in (0, 1] with value >= 0.
            s_star = a_coef < 0.0 ? lo : hi;
        }
    }
    s_star = std::min(1.0, std::max(0.0, s_star));
    Vec u = u0 + s_star * w;
    if (own_psi2(u) < -1e-12) {
        // The closed-form root was off; bisect toward the feasible endpoint.
        double lo_s = s_star, hi_s = 1.0;
        for (int it = 0; it < 80 && hi_s - lo_s > 1e-15; ++it) {
            const double mid = 0.5 * (lo_s + hi_s);
            (own_psi2(u0 + mid * w) >= -1e-12 ? hi_s : lo_s) = mid;
        }
        u = u0 + hi_s * w;
    }
    sel.u = u;
    return sel;
}

std::vector<Vec> apply_noncompliance(const std::vector<Vec>& committed,
                                     const std::vector<Vec>& selfish,
                                     const std::vector<double>& rho) {
    if (committed.size() != selfish.size() || committed.size() != rho.size())
        throw DimensionError("apply_noncompliance: per-node lists must match");
    std::vector<Vec> applied(committed.size());
    for (std::size_t i = 0; i < committed.size(); ++i) {
        if (rho[i] < 0.0 || rho[i] > 1.0)
            throw ArgumentError("apply_noncompliance: compliance factor outside [0, 1]");
        applied[i] = rho[i] * committed[i] + (1.0 - rho[i]) * selfish[i];
    }
    return applied;
}

namespace {

struct PeriodRecord {
    std::vector<Vec> control;
    std::vector<double> deficit;
    std::vector<double> e;
    std::vector<double> epsilon;
    std::vector<std::map<NodeId, double>> commitments;
};

}  // namespace

Trajectory run(const NetworkGraph& graph, const DynamicsModel& model,
               const std::vector<BarrierSpec>& barriers, const Scenario& scenario,
               const NetworkState& x0) {
    scenario.validate(graph);
    const int n = graph.size();
    if (static_cast<int>(barriers.size()) != n)
        throw DimensionError("run: need one barrier per node");
    if (x0.total_dim() != graph.total_state_dim())
        throw DimensionError("run: initial state does not match graph");

    Trajectory traj;
    NetworkState state = x0;
    ControlBox box = scenario.box;
    std::vector<double> rho(n, 1.0);
    std::vector<Vec> u_prev(n);
    for (int i = 0; i < n; ++i) u_prev[i] = Vec::Zero(graph.control_dim(i));

    const int steps_per_period =
        static_cast<int>(std::round(scenario.control_period / scenario.dt));
    const int periods = static_cast<int>(std::round(scenario.t_end / scenario.control_period));
    std::size_t next_event = 0;

    PeriodRecord rec;
    auto record_sample = [&](double t) {
        TrajectorySample s;
        s.t = t;
        s.control = rec.control;
        s.deficit = rec.deficit;
        s.e = rec.e;
        s.epsilon = rec.epsilon;
        s.commitments = rec.commitments;
        for (int i = 0; i < n; ++i) {
            s.state.push_back(state.node(i));
            s.lo.push_back(box.lo[i]);
            s.hi.push_back(box.hi[i]);
            const LieBundle b = lie_bundle(model, barriers[i], graph, state, i);
            s.h.push_back(b.h);
            s.psi1.push_back(psi1(b, scenario.gains[i], rec.control[i]));
            std::map<NodeId, Vec> u_nb;
            for (NodeId j : graph.in_neighbors(i)) u_nb[j] = rec.control[j];
            const auto deriv = scenario.derivative_policy.make(
                graph.control_dim(i), u_prev[i], scenario.control_period);
            s.psi2.push_back(psi2_direct(b, scenario.gains[i], rec.control[i], u_nb,
                                         deriv.eval(rec.control[i])));
        }
        traj.samples.push_back(std::move(s));
    };

    double t = 0.0;
    for (int p = 0; p < periods; ++p) {
        while (next_event < scenario.events.size() &&
               scenario.events[next_event].time <= t + 1e-12) {
            const Event& ev = scenario.events[next_event];
            if (ev.kind == Event::Kind::control_box) {
                for (int i = 0; i < n; ++i) {
                    box.lo[i].setConstant(ev.box_lo);
                    box.hi[i].setConstant(ev.box_hi);
                }
            } else {
                rho[ev.node] = ev.rho;
            }
            ++next_event;
        }

        std::vector<NodeContext> contexts;
        std::vector<ControlDerivative> derivs;
        contexts.reserve(n);
        try {
            for (int i = 0; i < n; ++i) {
                NodeContext ctx;
                ctx.bundle = lie_bundle(model, barriers[i], graph, state, i);
                ctx.gains = scenario.gains[i];
                ctx.box_lo = box.lo[i];
                ctx.box_hi = box.hi[i];
                ctx.deriv = scenario.derivative_policy.make(
                    graph.control_dim(i), u_prev[i], scenario.control_period);
                derivs.push_back(ctx.deriv);
                contexts.push_back(std::move(ctx));
            }
        } catch (const NumericalDomainError& err) {
            traj.status = Trajectory::Status::aborted_blowup;
            traj.diagnostic = err.what() + std::string(" at t = ") + std::to_string(t);
            return traj;
        }

        NegotiationOutcome outcome;
        try {
            outcome = run_collaboration(graph, contexts, scenario.negotiation);
        } catch (const InfeasibleError& err) {
            traj.status = Trajectory::Status::aborted_infeasible;
            traj.diagnostic = err.what();
            return traj;
        }
        if (!outcome.converged) ++traj.negotiation_failures;

        std::vector<Vec> committed(n), selfish(n);
        for (int i = 0; i < n; ++i) {
            SecondOrderCut cut;
            cut.deriv = derivs[i];
            cut.promised = 0.0;
            for (const auto& [j, p] : outcome.ledgers[i].incoming) cut.promised += p;
            committed[i] = select_control(outcome.allowed[i], contexts[i].bundle,
                                          scenario.gains[i], cut)
                               .u;
            AllowedActionSet plain(box.lo[i], box.hi[i]);
            SecondOrderCut selfish_cut;
            selfish_cut.deriv = derivs[i];
            selfish_cut.promised = 0.0;
            selfish[i] =
                select_control(plain, contexts[i].bundle, scenario.gains[i], selfish_cut).u;
        }
        const std::vector<Vec> applied = apply_noncompliance(committed, selfish, rho);

        ResilienceSample res;
        res.t = t;
        rec.control = applied;
        rec.deficit = outcome.deficit;
        rec.e.assign(n, 0.0);
        rec.epsilon.assign(n, 0.0);
        rec.commitments.assign(n, {});
        for (int i = 0; i < n; ++i) {
            rec.commitments[i] = outcome.ledgers[i].incoming;
            const double nu = scenario.gains[i].nu();
            double nu_star = 0.0;
            double eps = 0.0;
            bool well_posed = true;
            try {
                NodeCapabilityProblem prob{contexts[i].bundle, outcome.allowed[i],
                                           derivs[i]};
                double nu_max = scenario.resilience_nu_max;
                NuStarResult ns = find_nu_star(prob, scenario.resilience_delta_nu, nu_max);
                for (int retry = 0; ns.saturated && retry < 3; ++retry) {
                    nu_max *= 2.0;
                    ns = find_nu_star(prob, scenario.resilience_delta_nu, nu_max);
                }
                nu_star = ns.nu_star;
                if (!ns.saturated) {
                    const auto u_star =
                        maximize_linear(contexts[i].bundle.lg_h, outcome.allowed[i]);
                    const auto obj =
                        QuadraticObjective::from_bundle(contexts[i].bundle, nu, derivs[i]);
                    const auto u_c = maximize_capability(obj, outcome.allowed[i]);
                    eps = epsilon_tolerance(contexts[i].bundle, derivs[i], nu, nu_star,
                                            u_star.u_star, u_c.u_star);
                }
            } catch (const IllPosedError&) {
                // A zero entry of L_g h (e.g. a disease-free node): no
                // meaningful resilience boundary at this state.
                well_posed = false;
            }
            double e_i = 0.0;
            for (NodeId j : graph.in_neighbors(i)) {
                const RowVec& a_ij = contexts[i].bundle.cross_g.at(j);
                const double promise = outcome.ledgers[i].incoming.at(j);
                const auto mina = minimal_assistance(a_ij, -promise, outcome.allowed[j]);
                e_i += compliance(a_ij, mina.u, applied[j]);
            }
            rec.e[i] = e_i;
            rec.epsilon[i] = well_posed ? eps : 0.0;
            res.per_node.push_back(check_resilience(e_i, rec.epsilon[i], nu, nu_star));
        }
        traj.resilience.push_back(std::move(res));

        for (int s = 0; s < steps_per_period; ++s) {
            try {
                record_sample(t);
                state = rk4_step(model, graph, state, applied, scenario.dt, t);
            } catch (const IntegrationBlowupError& err) {
                traj.status = Trajectory::Status::aborted_blowup;
                traj.diagnostic = err.what() + std::string(" at t = ") +
                                  std::to_string(err.time);
                return traj;
            } catch (const NumericalDomainError& err) {
                traj.status = Trajectory::Status::aborted_blowup;
                traj.diagnostic =
                    err.what() + std::string(" at t = ") + std::to_string(t);
                return traj;
            }
            if (model.clamp_state) {
                for (int i = 0; i < n; ++i) {
                    Vec xi = state.node(i);
                    const double excursion = model.clamp_state(xi, i);
                    state.node(i) = xi;
                    if (excursion > 0.0) {
                        ++traj.clamp_events;
                        traj.max_clamp_excursion =
                            std::max(traj.max_clamp_excursion, excursion);
                    }
                }
            }
            t = (p * steps_per_period + s + 1) * scenario.dt;
        }
        u_prev = applied;
    }
    try {
        record_sample(scenario.t_end);
    } catch (const NumericalDomainError& err) {
        traj.status = Trajectory::Status::aborted_blowup;
        traj.diagnostic = err.what() + std::string(" at t = ") + std::to_string(t);
    }
    return traj;
}

}  // namespace ccbfnet
