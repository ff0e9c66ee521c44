#include <benchmark/benchmark.h>

#include "rumax/generator.hpp"
#include "rumax/transport.hpp"

namespace {

// W_2 between the uniform measure and a ball reference on a b^T-leaf tree.
void BM_Wasserstein(benchmark::State& state) {
    rumax::Shape shape;
    shape.horizon = static_cast<int>(state.range(0));
    shape.branching = static_cast<int>(state.range(1));
    shape.ambiguity = rumax::AmbiguityKind::kBall;
    const auto inst = rumax::generate_instance(7, shape);
    const auto& ball = std::get<rumax::WassersteinBall>(inst.problem.ambiguity);
    const rumax::CostMatrix costs(inst.problem.lattice, ball.metric);
    const auto uniform = rumax::Measure::uniform(inst.problem.lattice);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rumax::wasserstein_p(costs, uniform, ball.reference).cost);
    }
    state.counters["leaves"] = static_cast<double>(inst.problem.lattice.num_leaves());
}

}  // namespace

BENCHMARK(BM_Wasserstein)->Args({1, 4})->Args({2, 3})->Args({2, 4})->Args({3, 3})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
