// simulate and encode: scene generation and conditioning-map export.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "dataset.hpp"
#include "intragen/manifest.hpp"
#include "intragen/physics.hpp"
#include "intragen/version.hpp"

namespace intragen::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateOptions {
    std::string scenario = "pool";
    int objects = 2;
    int frames = 16;
    int width = 64;
    int height = 64;
    int substeps = 8;
    double restitution = 0.95;
    double friction = 0.005;
    std::uint64_t seed = 0;
    std::string out = "scene.json";
    std::string render_dir;
    int render_width = 0;   // 0 -> scene dims
    int render_height = 0;
};

void run_simulate(const SimulateOptions& opt) {
    StageTimer timer;
    SceneConfig cfg;
    cfg.scenario = scenario_from_string(opt.scenario);
    cfg.object_count = opt.objects;
    cfg.frame_count = opt.frames;
    cfg.width = opt.width;
    cfg.height = opt.height;
    cfg.substeps = opt.substeps;
    cfg.restitution = opt.restitution;
    cfg.friction = opt.friction;
    cfg.seed = opt.seed;

    const Scene scene = simulate(cfg);

    const fs::path out_path(opt.out);
    const fs::path base_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    fs::create_directories(base_dir);
    atomic_write_file(out_path.string(), scene_to_json(scene) + "\n");

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "simulate";
    manifest.parameters = {{"scenario", opt.scenario},
                           {"objects", std::to_string(opt.objects)},
                           {"frames", std::to_string(opt.frames)},
                           {"width", std::to_string(opt.width)},
                           {"height", std::to_string(opt.height)},
                           {"substeps", std::to_string(opt.substeps)},
                           {"restitution", std::to_string(opt.restitution)},
                           {"friction", std::to_string(opt.friction)},
                           {"seed", std::to_string(opt.seed)},
                           {"out", opt.out},
                           {"render_dir", opt.render_dir}};
    add_output(manifest, base_dir, out_path);

    if (!opt.render_dir.empty()) {
        const int rw = opt.render_width > 0 ? opt.render_width : cfg.width;
        const int rh = opt.render_height > 0 ? opt.render_height : cfg.height;
        const auto frames = render_scene(scene, rw, rh);
        write_frame_stack(frames, opt.render_dir, "frame");
        for (std::size_t f = 0; f < frames.size(); ++f)
            add_output(manifest, base_dir,
                       fs::path(opt.render_dir) / frame_filename("frame", static_cast<int>(f)));
    }

    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (base_dir / "manifest.json").string());
    std::cout << "scene written to " << opt.out << " (" << scene.events.size() << " events)\n";
}

struct EncodeOptions {
    std::string traj;
    std::string modality = "both";
    double sigma = 2.0;
    double v_max = 0.0;  // 0 -> 99th percentile of the set
    int point_radius = 0;  // 0 -> resolution default
    std::string out_dir = "cond";
};

void run_encode(const EncodeOptions& opt) {
    StageTimer timer;
    if (opt.modality != "sparse" && opt.modality != "id" && opt.modality != "both")
        throw CLI::ValidationError("--modality", "must be sparse, id or both");

    const Scene scene = load_scene(opt.traj);
    const TrajectorySet& set = scene.trajectories;
    const double v_max = opt.v_max > 0.0 ? opt.v_max : default_v_max(set);
    const int radius =
        opt.point_radius > 0 ? opt.point_radius : default_point_radius(set.width, set.height);

    const fs::path out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "encode";
    manifest.parameters = {{"traj", opt.traj},
                           {"modality", opt.modality},
                           {"sigma", std::to_string(opt.sigma)},
                           {"v_max", std::to_string(v_max)},
                           {"point_radius", std::to_string(radius)},
                           {"out_dir", opt.out_dir}};
    add_input(manifest, out_dir, opt.traj);

    if (opt.modality == "sparse" || opt.modality == "both") {
        const auto stack = draw_sparse_pose(set, v_max, radius, opt.sigma);
        write_condition_stack(stack, out_dir, "pose");
        for (std::size_t f = 0; f < stack.frames.size(); ++f)
            add_output(manifest, out_dir,
                       out_dir / frame_filename("pose", static_cast<int>(f)));
    }
    if (opt.modality == "id" || opt.modality == "both") {
        int max_id = 0;
        for (const auto& t : set.trajectories) max_id = std::max(max_id, t.object_id);
        IdPalette palette = scene_palette(scene);
        // scene colors index by dense id order; fall back to generated hues
        // when body metadata is absent or ids are sparse
        if (palette.colors.size() < static_cast<std::size_t>(max_id) + 1)
            palette = assign_palette(max_id + 1);
        const auto stack = draw_object_id(set, palette, radius);
        write_condition_stack(stack, out_dir, "id");
        for (std::size_t f = 0; f < stack.frames.size(); ++f)
            add_output(manifest, out_dir, out_dir / frame_filename("id", static_cast<int>(f)));
    }

    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (out_dir / "manifest.json").string());
    std::cout << "condition maps written to " << opt.out_dir << "\n";
}

}  // namespace

void register_simulate(CLI::App& app) {
    auto opt = std::make_shared<SimulateOptions>();
    auto* cmd = app.add_subcommand("simulate", "Generate a seeded interaction scene");
    cmd->add_option("--scenario", opt->scenario, "pool, domino or movi2d");
    cmd->add_option("--objects", opt->objects, "object count");
    cmd->add_option("--frames", opt->frames, "frame count");
    cmd->add_option("--width", opt->width, "scene width in pixels");
    cmd->add_option("--height", opt->height, "scene height in pixels");
    cmd->add_option("--substeps", opt->substeps, "integrator substeps per frame");
    cmd->add_option("--restitution", opt->restitution, "collision restitution in [0, 1]");
    cmd->add_option("--friction", opt->friction, "velocity decay per substep");
    cmd->add_option("--seed", opt->seed, "root seed");
    cmd->add_option("--out", opt->out, "output scene JSON path");
    cmd->add_option("--render-dir", opt->render_dir, "also render frames into this directory");
    cmd->add_option("--render-width", opt->render_width, "render resolution override");
    cmd->add_option("--render-height", opt->render_height, "render resolution override");
    cmd->callback([opt] { run_simulate(*opt); });
}

void register_encode(CLI::App& app) {
    auto opt = std::make_shared<EncodeOptions>();
    auto* cmd = app.add_subcommand("encode", "Encode trajectories into conditioning maps");
    cmd->add_option("--traj", opt->traj, "scene/trajectory JSON")->required();
    cmd->add_option("--modality", opt->modality, "sparse, id or both");
    cmd->add_option("--sigma", opt->sigma, "Gaussian blur sigma for sparse poses");
    cmd->add_option("--vmax", opt->v_max, "speed mapped to full saturation");
    cmd->add_option("--point-radius", opt->point_radius, "disc radius in pixels");
    cmd->add_option("--out-dir", opt->out_dir, "output directory");
    cmd->callback([opt] { run_encode(*opt); });
}

}  // namespace intragen::cli
