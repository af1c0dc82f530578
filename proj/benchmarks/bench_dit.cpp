#include <benchmark/benchmark.h>

#include "intragen/dit.hpp"
#include "intragen/rng.hpp"
#include "intragen/schedule.hpp"

using namespace intragen;

namespace {

DitConfig toy_config() {
    DitConfig cfg;
    cfg.frames = 16;
    cfg.width = 32;
    cfg.height = 32;
    cfg.pool = 2;
    cfg.patch = 2;
    cfg.embed = 64;
    cfg.blocks = 4;
    cfg.heads = 4;
    cfg.diffusion_steps = 200;
    cfg.cond = CondMode::none;
    cfg.seed = 1;
    return cfg;
}

LatentVideo gaussian_latent(const DitConfig& cfg, std::uint64_t seed) {
    LatentVideo l(cfg.frames, cfg.latent_h(), cfg.latent_w(), cfg.channels);
    Rng rng(seed);
    for (auto& v : l.data) v = rng.normal();
    return l;
}

}  // namespace

static void BM_DitForward(benchmark::State& state) {
    const DitConfig cfg = toy_config();
    DitModel<float> model(cfg);
    const auto latent = gaussian_latent(cfg, 2);
    const Shape lshape{cfg.frames, cfg.latent_h(), cfg.latent_w(), cfg.channels};
    for (auto _ : state) {
        Graph<float> g;
        const auto p = model.emit_params(g);
        std::vector<float> cast(latent.data.begin(), latent.data.end());
        const int noisy = g.input(lshape, std::move(cast));
        const int out = model.build_noise_pred(g, p, noisy, 10, std::nullopt);
        benchmark::DoNotOptimize(g.value(out).data());
    }
}
BENCHMARK(BM_DitForward)->Unit(benchmark::kMillisecond);

static void BM_TrainingStep(benchmark::State& state) {
    const DitConfig cfg = toy_config();
    DitModel<float> model(cfg);
    Trainer<float> trainer(model, make_linear_schedule(cfg.diffusion_steps), 3);
    const auto a = gaussian_latent(cfg, 4);
    const auto b = gaussian_latent(cfg, 5);
    std::vector<TrainSample> batch{{&a, nullptr, nullptr}, {&b, nullptr, nullptr}};
    for (auto _ : state) benchmark::DoNotOptimize(trainer.step(batch));
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);
