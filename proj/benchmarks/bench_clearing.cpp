#include <benchmark/benchmark.h>

#include <random>

#include "batchclear/solver_convex.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/solver_tatonnement.hpp"
#include "support/fixtures.hpp"

using namespace batchclear;

static void BM_DemandConstantProduct(benchmark::State& state) {
    trading_function fn(constant_product{});
    std::vector<double> res = {1.0, 10.0};
    std::vector<double> p = {40.0, 1.0};
    for (auto _ : state) {
        auto r = compute_demand(fn, res, p);
        benchmark::DoNotOptimize(r.new_reserves[0]);
    }
}
BENCHMARK(BM_DemandConstantProduct);

static void BM_DemandLmsr(benchmark::State& state) {
    trading_function fn(lmsr_rule{});
    std::vector<double> res = {1.0, 1.0};
    std::vector<double> p = {1.0, 2.0};
    for (auto _ : state) {
        auto r = compute_demand(fn, res, p);
        benchmark::DoNotOptimize(r.delta[0]);
    }
}
BENCHMARK(BM_DemandLmsr);

static void BM_AggregateDemand(benchmark::State& state) {
    std::mt19937 rng(1);
    fixtures::generator_options gopts;
    gopts.max_participants = static_cast<int>(state.range(0));
    auto inst = fixtures::random_instance(rng, gopts);
    price_vector p;
    p.values.assign(static_cast<size_t>(inst.asset_count()), 1.0);
    for (auto _ : state) {
        auto z = aggregate_demand(inst, p);
        benchmark::DoNotOptimize(z[0]);
    }
}
BENCHMARK(BM_AggregateDemand)->Arg(10)->Arg(100);

static void BM_ReferenceSolveLmsr(benchmark::State& state) {
    auto inst = fixtures::lmsr_instance();
    for (auto _ : state) {
        auto r = solve_two_asset(inst);
        benchmark::DoNotOptimize(r.solution.prices[0]);
    }
}
BENCHMARK(BM_ReferenceSolveLmsr);

static void BM_ConvexSolveTwoProduct(benchmark::State& state) {
    auto inst = fixtures::two_product_instance();
    for (auto _ : state) {
        auto r = solve_convex(inst);
        benchmark::DoNotOptimize(r.solution.objective_value);
    }
}
BENCHMARK(BM_ConvexSolveTwoProduct);

static void BM_ConvexObjective(benchmark::State& state) {
    auto inst = fixtures::two_product_instance();
    auto prog = build_convex_program(inst);
    program_state s;
    s.p = {6.5, 1.0};
    s.y.assign(static_cast<size_t>(prog.half_count()), 0.1);
    prog.project_flows(s.y);
    for (auto _ : state) benchmark::DoNotOptimize(prog.objective(s));
}
BENCHMARK(BM_ConvexObjective);

BENCHMARK_MAIN();
