#include <benchmark/benchmark.h>

#include "ccbfnet/negotiation.hpp"
#include "ccbfnet/optimizer.hpp"
#include "ccbfnet/sim.hpp"
#include "ccbfnet/sis.hpp"

namespace {

using namespace ccbfnet;

struct Fixture {
    ReferenceScenario ref = paper_scenario();
    NetworkGraph graph = ref.params.graph();
    DynamicsModel model = sis_dynamics(ref.params);
    NetworkState state;

    Fixture() : state(graph, ref.x0) {}

    LieBundle bundle(NodeId i) const {
        return lie_bundle(model, sis_barrier(ref.params, i), graph, state, i);
    }
};

void BM_LieBundle(benchmark::State& bm) {
    Fixture f;
    for (auto _ : bm) benchmark::DoNotOptimize(f.bundle(0));
}
BENCHMARK(BM_LieBundle);

void BM_MaximizeCapability(benchmark::State& bm) {
    Fixture f;
    const auto b = f.bundle(0);
    const auto deriv = ControlDerivative::zero(1);
    const auto obj = QuadraticObjective::from_bundle(b, 0.6, deriv);
    AllowedActionSet box(Vec::Constant(1, 0.0), Vec::Constant(1, 0.75));
    for (auto _ : bm) benchmark::DoNotOptimize(maximize_capability(obj, box));
}
BENCHMARK(BM_MaximizeCapability);

void BM_FindNuStar(benchmark::State& bm) {
    Fixture f;
    Vec x(3);
    x << 0.08, 0.1, 0.1;
    const NetworkState st(f.graph, x);
    NodeCapabilityProblem p{
        lie_bundle(f.model, sis_barrier(f.ref.params, 0), f.graph, st, 0),
        AllowedActionSet(Vec::Constant(1, 0.0), Vec::Constant(1, 0.75)),
        ControlDerivative::zero(1)};
    for (auto _ : bm) benchmark::DoNotOptimize(find_nu_star(p, 0.01, 2.0));
}
BENCHMARK(BM_FindNuStar);

void BM_NegotiationRound(benchmark::State& bm) {
    Fixture f;
    Vec x(3);
    x << 0.098, 0.1, 0.1;
    const NetworkState st(f.graph, x);
    std::vector<NodeContext> nodes;
    for (int i = 0; i < 3; ++i) {
        NodeContext ctx;
        ctx.bundle = lie_bundle(f.model, sis_barrier(f.ref.params, i), f.graph, st, i);
        ctx.gains = {0.3, 0.3};
        ctx.box_lo = Vec::Constant(1, 0.0);
        ctx.box_hi = Vec::Constant(1, 0.75);
        ctx.deriv = ControlDerivative::zero(1);
        nodes.push_back(std::move(ctx));
    }
    for (auto _ : bm) benchmark::DoNotOptimize(run_collaboration(f.graph, nodes));
}
BENCHMARK(BM_NegotiationRound);

void BM_Rk4Step(benchmark::State& bm) {
    Fixture f;
    const std::vector<Vec> u(3, Vec::Constant(1, 0.2));
    for (auto _ : bm) benchmark::DoNotOptimize(rk4_step(f.model, f.graph, f.state, u, 0.01));
}
BENCHMARK(BM_Rk4Step);

void BM_ClosedLoopSecond(benchmark::State& bm) {
    Fixture f;
    std::vector<BarrierSpec> barriers;
    for (int i = 0; i < 3; ++i) barriers.push_back(sis_barrier(f.ref.params, i));
    Scenario sc;
    sc.t_end = 1.0;
    sc.dt = 0.01;
    sc.control_period = 0.05;
    sc.gains.assign(3, {0.3, 0.3});
    sc.box = ControlBox::uniform(f.graph, 0.0, 0.75);
    sc.resilience_nu_max = 2.0;
    for (auto _ : bm)
        benchmark::DoNotOptimize(run(f.graph, f.model, barriers, sc, f.state));
}
BENCHMARK(BM_ClosedLoopSecond)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
