#include <benchmark/benchmark.h>

#include "intragen/conditions.hpp"
#include "intragen/rng.hpp"

using namespace intragen;

namespace {

TrajectorySet moving_set(int objects, int frames, int dim) {
    Rng rng(5);
    TrajectorySet set;
    set.frame_count = frames;
    set.width = set.height = dim;
    for (int k = 0; k < objects; ++k) {
        Trajectory t;
        t.object_id = k;
        Point p{rng.uniform(4, dim - 4), rng.uniform(4, dim - 4)};
        const Velocity v{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        for (int f = 0; f < frames; ++f) {
            t.points.push_back(p);
            p.x += v.dx;
            p.y += v.dy;
        }
        t.visible.assign(static_cast<std::size_t>(frames), true);
        set.trajectories.push_back(std::move(t));
    }
    return set;
}

}  // namespace

static void BM_GaussianBlur(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    Rng rng(3);
    ImageF img(dim, dim, 3);
    for (auto& v : img.data) v = rng.uniform();
    for (auto _ : state) {
        auto out = gaussian_blur(img, 2.0);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<long>(img.data.size()) * 8);
}
BENCHMARK(BM_GaussianBlur)->Arg(32)->Arg(128)->Arg(512);

static void BM_DrawSparsePose(benchmark::State& state) {
    const auto set = moving_set(8, 16, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto stack = draw_sparse_pose(set, 4.0, 2, 2.0);
        benchmark::DoNotOptimize(stack.frames.data());
    }
}
BENCHMARK(BM_DrawSparsePose)->Arg(32)->Arg(128);

static void BM_DrawObjectId(benchmark::State& state) {
    const auto set = moving_set(8, 16, static_cast<int>(state.range(0)));
    const auto palette = assign_palette(8);
    for (auto _ : state) {
        auto stack = draw_object_id(set, palette, 2);
        benchmark::DoNotOptimize(stack.frames.data());
    }
}
BENCHMARK(BM_DrawObjectId)->Arg(32)->Arg(128);
