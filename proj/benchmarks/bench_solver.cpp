#include <benchmark/benchmark.h>

#include "rumax/generator.hpp"
#include "rumax/solver.hpp"

namespace {

void run_solve(benchmark::State& state, rumax::AmbiguityKind kind, rumax::UtilityKind utility) {
    rumax::Shape shape;
    shape.horizon = static_cast<int>(state.range(0));
    shape.branching = static_cast<int>(state.range(1));
    shape.ambiguity = kind;
    shape.utility = utility;
    const auto inst = rumax::generate_instance(3, shape);
    int iterations = 0;
    for (auto _ : state) {
        const auto r = rumax::solve(inst.problem);
        iterations = r.iterations;
        benchmark::DoNotOptimize(r.gap);
    }
    state.counters["cg_iters"] = iterations;
}

void BM_SolveHull(benchmark::State& s) { run_solve(s, rumax::AmbiguityKind::kHull, rumax::UtilityKind::kExponential); }
void BM_SolveMoment(benchmark::State& s) { run_solve(s, rumax::AmbiguityKind::kMoment, rumax::UtilityKind::kExponential); }
void BM_SolveBall(benchmark::State& s) { run_solve(s, rumax::AmbiguityKind::kBall, rumax::UtilityKind::kExponential); }
void BM_SolvePenalty(benchmark::State& s) { run_solve(s, rumax::AmbiguityKind::kPenalty, rumax::UtilityKind::kExponential); }
void BM_SolveTabulated(benchmark::State& s) { run_solve(s, rumax::AmbiguityKind::kHull, rumax::UtilityKind::kTabulated); }

}  // namespace

BENCHMARK(BM_SolveHull)->Args({2, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveMoment)->Args({2, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveBall)->Args({2, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolvePenalty)->Args({2, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveTabulated)->Args({2, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
