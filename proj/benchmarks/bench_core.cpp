#include <benchmark/benchmark.h>

#include "larvae/control.hpp"
#include "larvae/dynamics.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/fixtures.hpp"
#include "larvae/pde_oracle.hpp"
#include "larvae/scenario.hpp"

namespace {

larvae::ScenarioConfig scenario_at(int intervals) {
    larvae::ScenarioConfig cfg =
        larvae::parse_scenario(larvae::fixture_text("fig2"), "bench");
    return larvae::with_intervals(cfg, intervals);
}

void BM_solve_steady_state(benchmark::State& state) {
    larvae::ScenarioConfig cfg = scenario_at(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        larvae::SteadyState s = larvae::solve_steady_state(cfg.P_star, cfg);
        benchmark::DoNotOptimize(s.zeta_I);
    }
}
BENCHMARK(BM_solve_steady_state)->Arg(64)->Arg(256)->Arg(1024);

void BM_transform_step(benchmark::State& state) {
    larvae::ScenarioConfig cfg = scenario_at(static_cast<int>(state.range(0)));
    larvae::SteadyState steady = larvae::solve_steady_state(cfg.P_star, cfg);
    larvae::Controller ctrl = larvae::make_controller(cfg, steady);
    larvae::TransformedState st = larvae::initial_state(cfg, steady, larvae::SimMode::Stabilize);
    for (auto _ : state) {
        larvae::step(st, ctrl, steady, cfg);
        benchmark::DoNotOptimize(st.eta);
    }
}
BENCHMARK(BM_transform_step)->Arg(128)->Arg(512);

void BM_direct_step(benchmark::State& state) {
    larvae::ScenarioConfig cfg = scenario_at(static_cast<int>(state.range(0)));
    larvae::SteadyState steady = larvae::solve_steady_state(cfg.P_star, cfg);
    larvae::Controller ctrl = larvae::make_controller(cfg, steady);
    larvae::DirectSolver solver(cfg);
    larvae::DensityField field = larvae::initial_density(cfg, steady);
    for (auto _ : state) {
        solver.step(field, ctrl);
        benchmark::DoNotOptimize(field.I[0]);
    }
}
BENCHMARK(BM_direct_step)->Arg(128)->Arg(512);

void BM_expression_eval(benchmark::State& state) {
    larvae::Expression e =
        larvae::Expression::parse("K_star*(1+0.2*sin(3*pi*t/T))");
    larvae::VarTable vars{{"K_star", 4.0}, {"t", 1.5}, {"T", 40.0}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(e.eval(vars));
    }
}
BENCHMARK(BM_expression_eval);

}  // namespace

BENCHMARK_MAIN();
