#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rumax/utility.hpp"

namespace {

rumax::Utility table(int knots) {
    rumax::TabulatedUtility t;
    for (int i = 0; i < knots; ++i) {
        const double x = -2.0 + 4.0 * i / (knots - 1);
        t.knots.push_back({x, -std::exp(-x)});
    }
    t.left_tail = {std::exp(2.0), 0.5 * std::exp(2.0)};
    return rumax::Utility(t);
}

void BM_ConjugateTabulated(benchmark::State& state) {
    const rumax::Conjugate v(table(static_cast<int>(state.range(0))));
    double y = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(v.value(0, y));
        y = y > 20.0 ? 0.01 : y * 1.1;
    }
}

void BM_ConjugateExponential(benchmark::State& state) {
    const rumax::Conjugate v(rumax::Utility::exponential(1.5));
    double y = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(v.value(0, y));
        y = y > 20.0 ? 0.01 : y * 1.1;
    }
}

}  // namespace

BENCHMARK(BM_ConjugateTabulated)->Arg(9)->Arg(65)->Arg(513);
BENCHMARK(BM_ConjugateExponential);

BENCHMARK_MAIN();
