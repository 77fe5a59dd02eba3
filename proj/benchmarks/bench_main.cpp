#include "epp/assembly.hpp"
#include "epp/ergodic.hpp"
#include "epp/short_cycle.hpp"
#include "epp/svi_mc.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

const epp::OscillatorParams kParams(1.0, 1.0, 1.0);

std::shared_ptr<const epp::Grid> grid_for(int ny) {
    epp::GridConfig c;
    c.Ny = ny;
    c.Nz = (ny - 1) / 3 + 1;
    return epp::build_grid(kParams, c);
}

void BM_Assemble(benchmark::State& state) {
    const auto g = grid_for(static_cast<int>(state.range(0)));
    const auto f = epp::constant_functional(1.0);
    for (auto _ : state) {
        auto sys = epp::assemble_generator(g, 0.0, epp::BoundaryConditionSpec::local_zero(), f);
        benchmark::DoNotOptimize(sys.matrix.nonZeros());
    }
    state.counters["unknowns"] = g->size();
}
BENCHMARK(BM_Assemble)->Arg(121)->Arg(241)->Arg(481)->Unit(benchmark::kMillisecond);

void BM_FactorAndSolve(benchmark::State& state) {
    const auto g = grid_for(static_cast<int>(state.range(0)));
    const auto f = epp::constant_functional(1.0);
    for (auto _ : state) {
        auto v = epp::solve_short_cycle(f, 0.0, g);
        benchmark::DoNotOptimize(v.values.data());
    }
    state.counters["unknowns"] = g->size();
}
BENCHMARK(BM_FactorAndSolve)->Arg(121)->Arg(241)->Arg(481)->Unit(benchmark::kMillisecond);

void BM_SolveFactored(benchmark::State& state) {
    const auto g = grid_for(241);
    const epp::ShortCycleSolver solver(g, 0.0);
    const auto f = epp::constant_functional(1.0);
    for (auto _ : state) {
        auto v = solver.solve(f);
        benchmark::DoNotOptimize(v.values.data());
    }
}
BENCHMARK(BM_SolveFactored)->Unit(benchmark::kMillisecond);

void BM_InteriorExteriorIteration(benchmark::State& state) {
    const auto g = grid_for(241);
    const auto f = epp::constant_functional(1.0);
    for (auto _ : state) {
        auto r = epp::solve_ve(f, g);
        benchmark::DoNotOptimize(r.second.iterations);
    }
}
BENCHMARK(BM_InteriorExteriorIteration)->Unit(benchmark::kMillisecond);

void BM_PhiQuadrature(benchmark::State& state) {
    const auto f = epp::constant_functional(1.0);
    double y = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(epp::phi_ray(kParams, f, +1, y));
        y = y < 5.0 ? y + 0.25 : 0.5;
    }
}
BENCHMARK(BM_PhiQuadrature)->Unit(benchmark::kMicrosecond);

void BM_SimulatorStep(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dt = 1e-3;
    const double sq = std::sqrt(dt);
    epp::SimState s = epp::make_state(kParams, 0.0, 0.0);
    for (auto _ : state) {
        s = epp::step(s, kParams, dt, sq * normal(rng));
        benchmark::DoNotOptimize(s.y);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorStep);

}  // namespace

BENCHMARK_MAIN();
