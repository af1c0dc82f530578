// train and sample: optimize the denoiser on scene directories and generate
// videos from a checkpoint conditioned on a trajectory file.

#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "dataset.hpp"
#include "intragen/dit.hpp"
#include "intragen/manifest.hpp"
#include "intragen/metrics.hpp"
#include "intragen/rng.hpp"
#include "intragen/schedule.hpp"
#include "intragen/version.hpp"

namespace intragen::cli {

namespace fs = std::filesystem;

namespace {

struct TrainOptions {
    std::string data_dir;
    std::string config;
    std::string ckpt = "model.bin";
    // flag overrides; negative/empty means "use the config file"
    long steps = -1;
    long batch = -1;
    double lr = -1.0;
    std::string cond;
    std::int64_t seed = -1;
    long log_every = 50;
};

void run_train(const TrainOptions& opt) {
    StageTimer timer;
    KeyValueConfig kv =
        opt.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(opt.config);
    // flags win over config file values
    if (opt.steps >= 0) kv.set("steps", std::to_string(opt.steps));
    if (opt.batch >= 0) kv.set("batch", std::to_string(opt.batch));
    if (opt.lr > 0) kv.set("lr", std::to_string(opt.lr));
    if (!opt.cond.empty()) kv.set("cond", opt.cond);
    if (opt.seed >= 0) kv.set("seed", std::to_string(opt.seed));

    DitConfig cfg = DitConfig::from_kv(kv);
    const long steps = kv.get_int("steps", 500);
    const long batch = std::max<long>(1, kv.get_int("batch", 2));

    const bool need_pose = cfg.cond != CondMode::none;
    const bool need_id = cfg.cond == CondMode::sparse_id;
    const auto dirs = list_scene_dirs(opt.data_dir);
    std::vector<SceneData> data(dirs.size());
    parallel_for(static_cast<int>(dirs.size()), [&](int i) {
        data[static_cast<std::size_t>(i)] =
            load_scene_data(dirs[static_cast<std::size_t>(i)], cfg, need_pose, need_id);
    });
    std::cout << "loaded " << data.size() << " scenes from " << opt.data_dir << "\n";

    DitModel<float> model(cfg);
    Trainer<float> trainer(model, make_linear_schedule(cfg.diffusion_steps), cfg.seed);
    Rng picker(derive_stream(cfg.seed, "batch"));
    for (long step = 0; step < steps; ++step) {
        std::vector<TrainSample> samples;
        for (long b = 0; b < batch; ++b) {
            const auto& d = data[picker.below(data.size())];
            samples.push_back({&d.video, need_pose ? &d.pose : nullptr,
                               need_id ? &d.id : nullptr});
        }
        const double loss = trainer.step(samples);
        if (opt.log_every > 0 && (step % opt.log_every == 0 || step == steps - 1))
            std::cout << "step " << step << " loss " << loss << "\n";
    }

    const fs::path ckpt_path(opt.ckpt);
    const fs::path base_dir =
        ckpt_path.has_parent_path() ? ckpt_path.parent_path() : fs::path(".");
    fs::create_directories(base_dir);
    save_checkpoint(model, ckpt_path.string());

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "train";
    manifest.parameters = kv.values();
    manifest.parameters["data_dir"] = opt.data_dir;
    manifest.parameters["ckpt"] = opt.ckpt;
    manifest.parameters["steps"] = std::to_string(steps);
    manifest.parameters["batch"] = std::to_string(batch);
    for (const auto& dir : dirs) add_input(manifest, base_dir, dir / "scene.json");
    if (!opt.config.empty()) add_input(manifest, base_dir, opt.config);
    add_output(manifest, base_dir, ckpt_path);
    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (base_dir / "manifest.json").string());
    std::cout << "checkpoint written to " << opt.ckpt << "\n";
}

struct SampleOptions {
    std::string ckpt;
    std::string traj;
    std::uint64_t seed = 0;
    std::string out_dir = "samples";
};

void run_sample(const SampleOptions& opt) {
    StageTimer timer;
    const auto model = load_checkpoint<float>(opt.ckpt);
    const auto& cfg = model.cfg;

    std::unique_ptr<CondLatents> cond;
    if (cfg.cond != CondMode::none) {
        if (opt.traj.empty())
            throw std::runtime_error("this checkpoint is trajectory-conditioned; pass --traj");
        const Scene scene = load_scene(opt.traj);
        const auto& set = scene.trajectories;
        if (set.width != cfg.width || set.height != cfg.height ||
            set.frame_count != cfg.frames)
            throw std::runtime_error("trajectory geometry does not match the checkpoint");
        cond = std::make_unique<CondLatents>(cond_latents_for(set, cfg));
    }

    const auto frames_f =
        sample_video(model, make_linear_schedule(cfg.diffusion_steps), cond.get(), opt.seed);
    FrameStack frames;
    for (const auto& f : frames_f) frames.push_back(to_u8(f));

    const fs::path out_dir(opt.out_dir);
    write_frame_stack(frames, out_dir, "frame");

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "sample";
    manifest.parameters = {{"ckpt", opt.ckpt},
                           {"traj", opt.traj},
                           {"seed", std::to_string(opt.seed)},
                           {"out_dir", opt.out_dir}};
    add_input(manifest, out_dir, opt.ckpt);
    if (!opt.traj.empty()) add_input(manifest, out_dir, opt.traj);
    for (std::size_t f = 0; f < frames.size(); ++f)
        add_output(manifest, out_dir, out_dir / frame_filename("frame", static_cast<int>(f)));
    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (out_dir / "manifest.json").string());
    std::cout << frames.size() << " frames written to " << opt.out_dir << "\n";
}

}  // namespace

void register_train(CLI::App& app) {
    auto opt = std::make_shared<TrainOptions>();
    auto* cmd = app.add_subcommand("train", "Train the denoiser on a scene directory");
    cmd->add_option("--data-dir", opt->data_dir, "root of scene_* directories")->required();
    cmd->add_option("--config", opt->config, "key = value training config");
    cmd->add_option("--ckpt", opt->ckpt, "output checkpoint path");
    cmd->add_option("--steps", opt->steps, "training steps (overrides config)");
    cmd->add_option("--batch", opt->batch, "batch size (overrides config)");
    cmd->add_option("--lr", opt->lr, "learning rate (overrides config)");
    cmd->add_option("--cond", opt->cond, "none, sparse or sparse_id (overrides config)");
    cmd->add_option("--seed", opt->seed, "training seed (overrides config)");
    cmd->add_option("--log-every", opt->log_every, "loss print interval, 0 silences");
    cmd->callback([opt] { run_train(*opt); });
}

void register_sample(CLI::App& app) {
    auto opt = std::make_shared<SampleOptions>();
    auto* cmd = app.add_subcommand("sample", "Generate a video from a checkpoint");
    cmd->add_option("--ckpt", opt->ckpt, "checkpoint path")->required();
    cmd->add_option("--traj", opt->traj, "conditioning trajectory JSON");
    cmd->add_option("--seed", opt->seed, "sampling seed");
    cmd->add_option("--out-dir", opt->out_dir, "output directory");
    cmd->callback([opt] { run_sample(*opt); });
}

}  // namespace intragen::cli
