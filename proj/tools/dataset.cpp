#include "dataset.hpp"

#include <algorithm>
#include <stdexcept>

#include "common.hpp"
#include "intragen/metrics.hpp"

namespace intragen::cli {

namespace fs = std::filesystem;

ConditionStack pose_stack_for(const TrajectorySet& set, const DitConfig& cfg) {
    return draw_sparse_pose(set, cfg.v_max, cfg.point_radius, cfg.sigma);
}

ConditionStack id_stack_for(const TrajectorySet& set, const DitConfig& cfg) {
    const int max_id = set.trajectories.empty()
                           ? 0
                           : std::max_element(set.trajectories.begin(), set.trajectories.end(),
                                              [](const Trajectory& a, const Trajectory& b) {
                                                  return a.object_id < b.object_id;
                                              })
                                 ->object_id;
    return draw_object_id(set, assign_palette(std::max(1, max_id + 1)), cfg.point_radius);
}

CondLatents cond_latents_for(const TrajectorySet& set, const DitConfig& cfg) {
    CondLatents cond;
    cond.pose = vae_stub_encode(pose_stack_for(set, cfg).frames, cfg.pool);
    if (cfg.cond == CondMode::sparse_id)
        cond.id = vae_stub_encode(id_stack_for(set, cfg).frames, cfg.pool);
    return cond;
}

SceneData load_scene_data(const fs::path& dir, const DitConfig& cfg, bool need_pose,
                          bool need_id) {
    SceneData data;
    data.scene = load_scene((dir / "scene.json").string());
    const auto& set = data.scene.trajectories;
    if (set.width != cfg.width || set.height != cfg.height || set.frame_count != cfg.frames)
        throw std::runtime_error(dir.string() + ": scene geometry does not match the model config");

    const FrameStack frames = read_frame_stack(dir / "frames", "frame", cfg.frames);
    data.video = vae_stub_encode(to_float_stack(frames), cfg.pool);

    auto load_or_draw = [&](const char* prefix, bool is_pose) {
        const fs::path cond_dir = dir / "cond";
        if (fs::exists(cond_dir / frame_filename(prefix, 0))) {
            const FrameStack stack = read_frame_stack(cond_dir, prefix, cfg.frames);
            return vae_stub_encode(to_float_stack(stack), cfg.pool);
        }
        const ConditionStack stack = is_pose ? pose_stack_for(set, cfg) : id_stack_for(set, cfg);
        return vae_stub_encode(stack.frames, cfg.pool);
    };
    if (need_pose) data.pose = load_or_draw("pose", true);
    if (need_id) data.id = load_or_draw("id", false);
    return data;
}

std::vector<fs::path> list_scene_dirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (!fs::exists(root)) throw std::runtime_error("data dir not found: " + root.string());
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "scene.json"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw std::runtime_error("no scene directories under " + root.string());
    return dirs;
}

TrajectorySet extracted_for_scoring(const FrameStack& frames, const Scene& scene) {
    const auto raw = extract_trajectories_toy(frames, scene_palette(scene));
    TrajectorySet kept;
    kept.frame_count = raw.frame_count;
    kept.width = raw.width;
    kept.height = raw.height;
    for (const auto& t : raw.trajectories) {
        const bool seen = std::any_of(t.visible.begin(), t.visible.end(), [](bool v) { return v; });
        if (seen) kept.trajectories.push_back(t);
    }
    if (kept.trajectories.empty()) {
        Trajectory center;
        center.object_id = 0;
        center.label = "undetected";
        center.points.assign(static_cast<std::size_t>(kept.frame_count),
                             {kept.width / 2.0, kept.height / 2.0});
        center.visible.assign(static_cast<std::size_t>(kept.frame_count), true);
        kept.trajectories.push_back(std::move(center));
        return kept;
    }
    return fill_gaps(kept);
}

}  // namespace intragen::cli
