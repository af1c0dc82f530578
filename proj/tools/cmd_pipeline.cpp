// pipeline: simulate -> encode -> train -> sample -> evaluate from one config,
// emitting a summary JSON with the final trajectory-quality numbers.

#include <filesystem>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "dataset.hpp"
#include "intragen/dit.hpp"
#include "intragen/manifest.hpp"
#include "intragen/metrics.hpp"
#include "intragen/mtem.hpp"
#include "intragen/physics.hpp"
#include "intragen/rng.hpp"
#include "intragen/schedule.hpp"
#include "intragen/version.hpp"

namespace intragen::cli {

namespace fs = std::filesystem;

namespace {

struct PipelineOptions {
    std::string config;
    std::int64_t seed = -1;  // overrides the config seed when >= 0
    std::string out_dir = "run";
};

struct SceneDirNames {
    fs::path dir;
    std::uint64_t seed;
};

std::string scene_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", index);
    return buf;
}

void generate_scene_dir(const SceneConfig& cfg, const DitConfig& model_cfg, const fs::path& dir) {
    const Scene scene = simulate(cfg);
    fs::create_directories(dir);
    atomic_write_file((dir / "scene.json").string(), scene_to_json(scene) + "\n");
    write_frame_stack(render_scene(scene), dir / "frames", "frame");
    // conditioning maps go through files so training consumes exactly what
    // `encode` would produce
    if (model_cfg.cond != CondMode::none)
        write_condition_stack(pose_stack_for(scene.trajectories, model_cfg), dir / "cond", "pose");
    if (model_cfg.cond == CondMode::sparse_id)
        write_condition_stack(id_stack_for(scene.trajectories, model_cfg), dir / "cond", "id");
}

void run_pipeline(const PipelineOptions& opt) {
    StageTimer timer;
    KeyValueConfig kv = KeyValueConfig::load(opt.config);
    if (opt.seed >= 0) kv.set("seed", std::to_string(opt.seed));
    DitConfig model_cfg = DitConfig::from_kv(kv);
    const std::uint64_t seed = model_cfg.seed;

    SceneConfig scene_cfg;
    scene_cfg.scenario = scenario_from_string(kv.get("scenario", "pool"));
    scene_cfg.object_count = static_cast<int>(kv.get_int("objects", 2));
    scene_cfg.width = model_cfg.width;
    scene_cfg.height = model_cfg.height;
    scene_cfg.frame_count = model_cfg.frames;
    scene_cfg.substeps = static_cast<int>(kv.get_int("substeps", 8));
    scene_cfg.restitution = kv.get_double("restitution", 0.95);
    scene_cfg.friction = kv.get_double("friction", 0.005);

    const int train_scenes = static_cast<int>(kv.get_int("scenes", 24));
    const int holdout = static_cast<int>(kv.get_int("holdout", 4));
    const long steps = kv.get_int("steps", 400);
    const long batch = std::max<long>(1, kv.get_int("batch", 2));
    if (train_scenes < 1 || holdout < 1)
        throw std::runtime_error("pipeline needs scenes >= 1 and holdout >= 1");

    const fs::path out_dir(opt.out_dir);
    const fs::path data_dir = out_dir / "data";
    const fs::path holdout_dir = out_dir / "holdout";
    const fs::path samples_dir = out_dir / "samples";
    fs::create_directories(out_dir);

    // stage 1+2: simulate and encode every scene, derived streams per index
    std::cout << "[pipeline] generating " << train_scenes << "+" << holdout << " scenes\n";
    parallel_for(train_scenes + holdout, [&](int i) {
        SceneConfig cfg = scene_cfg;
        cfg.seed = derive_stream(seed, "scene", static_cast<std::uint64_t>(i));
        const fs::path base = i < train_scenes ? data_dir : holdout_dir;
        const int local = i < train_scenes ? i : i - train_scenes;
        generate_scene_dir(cfg, model_cfg, base / scene_dir_name(local));
    });

    // stage 3: train
    std::cout << "[pipeline] training (" << steps << " steps, batch " << batch << ")\n";
    const bool need_pose = model_cfg.cond != CondMode::none;
    const bool need_id = model_cfg.cond == CondMode::sparse_id;
    const auto dirs = list_scene_dirs(data_dir);
    std::vector<SceneData> data(dirs.size());
    parallel_for(static_cast<int>(dirs.size()), [&](int i) {
        data[static_cast<std::size_t>(i)] =
            load_scene_data(dirs[static_cast<std::size_t>(i)], model_cfg, need_pose, need_id);
    });
    DitModel<float> model(model_cfg);
    Trainer<float> trainer(model, make_linear_schedule(model_cfg.diffusion_steps), seed);
    Rng picker(derive_stream(seed, "batch"));
    for (long step = 0; step < steps; ++step) {
        std::vector<TrainSample> samples;
        for (long b = 0; b < batch; ++b) {
            const auto& d = data[picker.below(data.size())];
            samples.push_back(
                {&d.video, need_pose ? &d.pose : nullptr, need_id ? &d.id : nullptr});
        }
        trainer.step(samples);
    }
    save_checkpoint(model, (out_dir / "model.bin").string());

    // stage 4+5: sample each held-out scene and score it
    std::cout << "[pipeline] sampling and scoring " << holdout << " held-out scenes\n";
    const auto sched = make_linear_schedule(model_cfg.diffusion_steps);
    struct PerScene {
        double mtem_percent = 0.0;
        double mtem_raw = 0.0;
        double psnr_db = 0.0;
        double ssim_value = 0.0;
        long pairs = 0;
        long unmatched = 0;
    };
    std::vector<PerScene> results(static_cast<std::size_t>(holdout));
    parallel_for(holdout, [&](int i) {
        const fs::path scene_dir = holdout_dir / scene_dir_name(i);
        const Scene gt = load_scene((scene_dir / "scene.json").string());

        std::unique_ptr<CondLatents> cond;
        if (model_cfg.cond != CondMode::none)
            cond = std::make_unique<CondLatents>(cond_latents_for(gt.trajectories, model_cfg));
        const auto video = sample_video(model, sched, cond.get(),
                                        derive_stream(seed, "sample",
                                                      static_cast<std::uint64_t>(i)));
        FrameStack frames;
        for (const auto& f : video) frames.push_back(to_u8(f));
        const fs::path sample_dir = samples_dir / scene_dir_name(i);
        write_frame_stack(frames, sample_dir, "frame");

        const TrajectorySet extracted = extracted_for_scoring(frames, gt);
        write_detection_csv(detections_from_set(extracted),
                            (sample_dir / "detections.csv").string());
        const MtemScore score = mtem_score(fill_gaps(gt.trajectories), extracted);

        const FrameStack gt_frames = read_frame_stack(scene_dir / "frames", "frame",
                                                      model_cfg.frames);
        PerScene& r = results[static_cast<std::size_t>(i)];
        r.mtem_percent = score.normalized_percent;
        r.mtem_raw = score.raw_total;
        r.psnr_db = psnr(to_float_stack(gt_frames), video);
        r.ssim_value = ssim(to_float_stack(gt_frames), video);
        r.pairs = static_cast<long>(score.pairs.pairs.size());
        r.unmatched = static_cast<long>(score.pairs.unmatched.size());
    });

    PerScene total;
    for (const auto& r : results) {
        total.mtem_percent += r.mtem_percent;
        total.mtem_raw += r.mtem_raw;
        total.psnr_db += r.psnr_db;
        total.ssim_value += r.ssim_value;
        total.pairs += r.pairs;
        total.unmatched += r.unmatched;
    }
    nlohmann::json summary;
    summary["mtem_percent"] = total.mtem_percent / holdout;
    summary["mtem_raw"] = total.mtem_raw / holdout;
    summary["psnr_db"] = total.psnr_db / holdout;
    summary["ssim"] = total.ssim_value / holdout;
    summary["pairs"] = total.pairs;
    summary["unmatched"] = total.unmatched;
    atomic_write_file((out_dir / "summary.json").string(), summary.dump(2) + "\n");

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "pipeline";
    manifest.parameters = kv.values();
    manifest.parameters["out_dir"] = opt.out_dir;
    add_input(manifest, out_dir, opt.config);
    add_output(manifest, out_dir, out_dir / "summary.json");
    add_output(manifest, out_dir, out_dir / "model.bin");
    for (int i = 0; i < train_scenes; ++i)
        add_output(manifest, out_dir, data_dir / scene_dir_name(i) / "scene.json");
    for (int i = 0; i < holdout; ++i) {
        add_output(manifest, out_dir, holdout_dir / scene_dir_name(i) / "scene.json");
        add_output(manifest, out_dir, samples_dir / scene_dir_name(i) / "detections.csv");
    }
    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (out_dir / "manifest.json").string());

    std::cout << "[pipeline] summary: " << summary.dump() << "\n";
}

}  // namespace

void register_pipeline(CLI::App& app) {
    auto opt = std::make_shared<PipelineOptions>();
    auto* cmd = app.add_subcommand(
        "pipeline", "Run simulate -> encode -> train -> sample -> evaluate end to end");
    cmd->add_option("--config", opt->config, "key = value pipeline config")->required();
    cmd->add_option("--seed", opt->seed, "root seed (overrides config)");
    cmd->add_option("--out-dir", opt->out_dir, "run directory");
    cmd->callback([opt] { run_pipeline(*opt); });
}

}  // namespace intragen::cli
