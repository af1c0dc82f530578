#pragma once

#include <filesystem>
#include <vector>

#include "intragen/dit.hpp"
#include "intragen/mtem.hpp"
#include "intragen/physics.hpp"

namespace intragen::cli {

// One training scene: ground truth plus latents ready for the model.
struct SceneData {
    Scene scene;
    LatentVideo video;
    LatentVideo pose;
    LatentVideo id;
};

ConditionStack pose_stack_for(const TrajectorySet& set, const DitConfig& cfg);
ConditionStack id_stack_for(const TrajectorySet& set, const DitConfig& cfg);
CondLatents cond_latents_for(const TrajectorySet& set, const DitConfig& cfg);

// Load scene.json + frames/ (+ cond/ PPMs when present, else recomputed from
// the trajectories) from one scene directory.
SceneData load_scene_data(const std::filesystem::path& dir, const DitConfig& cfg,
                          bool need_pose, bool need_id);

// Scene directories under a data root, sorted by name.
std::vector<std::filesystem::path> list_scene_dirs(const std::filesystem::path& root);

// Extraction policy for scoring generated videos: run the color-keyed
// tracker, drop objects that never appear, gap-fill the rest. An empty result
// degrades to a single frame-center trajectory so the score stays defined for
// arbitrarily bad generations.
TrajectorySet extracted_for_scoring(const FrameStack& frames, const Scene& scene);

}  // namespace intragen::cli
