#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intragen/conditions.hpp"
#include "intragen/image.hpp"
#include "intragen/trajectory.hpp"

namespace intragen {

enum class BodyState { moving, resting, captured, exited };
enum class EventKind { collision, pocket, topple, exit_scene, rest };
enum class Scenario { pool, domino, movi2d };

const char* to_string(EventKind k);
const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct Body {
    int object_id = 0;
    Point position;
    Velocity velocity;
    double radius = 1.0;
    double mass = 1.0;
    BodyState state = BodyState::moving;
    Rgb color{1.0, 0.0, 0.0};
};

struct SceneConfig {
    int width = 64;
    int height = 64;
    int frame_count = 16;
    int substeps = 8;
    double restitution = 0.95;
    double friction = 0.005;  // velocity decay fraction per substep
    Scenario scenario = Scenario::pool;
    int object_count = 2;
    std::uint64_t seed = 0;
};

struct SceneEvent {
    int frame = 0;
    EventKind kind = EventKind::collision;
    std::vector<int> participants;
};

struct Scene {
    SceneConfig config;
    TrajectorySet trajectories;
    std::vector<SceneEvent> events;
    std::vector<Body> bodies;  // initial-state metadata (radius, color, class source)
};

// Pre/post momentum and kinetic energy around one resolved pair collision,
// recorded for conservation audits.
struct CollisionAudit {
    int frame = 0;
    int id_a = 0;
    int id_b = 0;
    double px_pre = 0.0, py_pre = 0.0, ke_pre = 0.0;
    double px_post = 0.0, py_post = 0.0, ke_post = 0.0;
    double momentum_scale = 0.0;  // sum of |m v| over the pair before impact
};

// Bodies come to rest below this speed (px/frame) under friction.
inline constexpr double kRestSpeedEps = 1e-2;

struct DiscSimFeatures {
    bool cushions = true;          // reflect at frame edges
    bool pockets = false;          // capture discs entering pocket discs
    bool exit_at_boundary = false; // mark bodies leaving the frame as exited
    double pocket_radius = 0.0;    // 0 -> 1.8x the first body radius
};

// Shared fixed-timestep disc integrator behind the pool and movi2d scenarios;
// exposed so tests can drive explicit initial conditions.
Scene run_disc_simulation(const SceneConfig& cfg, std::vector<Body> bodies,
                          const DiscSimFeatures& features,
                          std::vector<CollisionAudit>* audit = nullptr);

struct DominoOptions {
    double spacing = 0.0;        // 0 -> 3x thickness
    double thickness = 0.0;      // 0 -> max(1, 0.012 * min(W, H))
    double height = 0.0;         // 0 -> 6x thickness
    int topple_frames = 6;       // frames for a full 90-degree fall
    bool trigger_first = true;   // start the chain at frame 0
    std::optional<std::vector<Point>> base_points;  // explicit layout override
};

Scene simulate_pool(const SceneConfig& cfg, std::vector<CollisionAudit>* audit = nullptr);
Scene simulate_domino(const SceneConfig& cfg, const DominoOptions& opts = {});
Scene simulate_movi2d(const SceneConfig& cfg, std::vector<CollisionAudit>* audit = nullptr);
Scene simulate(const SceneConfig& cfg);

// Palette slot per object, in object_id order (simulators assign ids 0..n-1).
IdPalette scene_palette(const Scene& scene);

// Filled discs of each visible body's color on black, drawn in ascending
// object_id order (later ids overdraw). Positions and radii scale with the
// output resolution.
FrameStack render_scene(const Scene& scene, int out_width, int out_height);
inline FrameStack render_scene(const Scene& scene) {
    return render_scene(scene, scene.config.width, scene.config.height);
}

// Scene JSON: the trajectory schema plus per-object radius/color and an
// events array.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace intragen
