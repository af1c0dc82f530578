#include <benchmark/benchmark.h>

#include "intragen/mtem.hpp"
#include "intragen/physics.hpp"

using namespace intragen;

static void BM_SimulatePool(benchmark::State& state) {
    SceneConfig cfg;
    cfg.scenario = Scenario::pool;
    cfg.object_count = static_cast<int>(state.range(0));
    cfg.width = cfg.height = 128;
    cfg.frame_count = 64;
    cfg.seed = 11;
    for (auto _ : state) {
        auto scene = simulate_pool(cfg);
        benchmark::DoNotOptimize(scene.events.size());
    }
}
BENCHMARK(BM_SimulatePool)->Arg(2)->Arg(8)->Arg(16);

static void BM_RenderScene(benchmark::State& state) {
    SceneConfig cfg;
    cfg.scenario = Scenario::pool;
    cfg.object_count = 8;
    cfg.width = cfg.height = 64;
    cfg.frame_count = 16;
    cfg.seed = 11;
    const auto scene = simulate_pool(cfg);
    const int res = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto frames = render_scene(scene, res, res);
        benchmark::DoNotOptimize(frames.data());
    }
}
BENCHMARK(BM_RenderScene)->Arg(64)->Arg(256);

static void BM_ExtractTrajectories(benchmark::State& state) {
    SceneConfig cfg;
    cfg.scenario = Scenario::pool;
    cfg.object_count = 8;
    cfg.width = cfg.height = static_cast<int>(state.range(0));
    cfg.frame_count = 16;
    cfg.seed = 11;
    const auto scene = simulate_pool(cfg);
    const auto frames = render_scene(scene);
    const auto palette = scene_palette(scene);
    for (auto _ : state) {
        auto set = extract_trajectories_toy(frames, palette);
        benchmark::DoNotOptimize(set.trajectories.data());
    }
}
BENCHMARK(BM_ExtractTrajectories)->Arg(64)->Arg(128);
