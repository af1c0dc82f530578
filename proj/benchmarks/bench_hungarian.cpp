#include <benchmark/benchmark.h>

#include "intragen/mtem.hpp"
#include "intragen/rng.hpp"

using namespace intragen;

static void BM_Hungarian(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(42);
    CostMatrix m;
    m.rows = m.cols = n;
    m.entries.resize(n * n);
    for (auto& e : m.entries) e = rng.uniform(0.0, 1000.0);
    for (auto _ : state) {
        auto match = hungarian(m);
        benchmark::DoNotOptimize(match.total_cost);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(16, 512)->Complexity();

static void BM_TrajDistance(benchmark::State& state) {
    const int frames = static_cast<int>(state.range(0));
    Rng rng(7);
    Trajectory a, b;
    for (int f = 0; f < frames; ++f) {
        a.points.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
        b.points.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
    }
    a.visible.assign(a.points.size(), true);
    b.visible.assign(b.points.size(), true);
    for (auto _ : state) benchmark::DoNotOptimize(traj_distance(a, b));
}
BENCHMARK(BM_TrajDistance)->Arg(64)->Arg(1024);
