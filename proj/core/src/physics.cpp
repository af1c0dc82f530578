#include "intragen/physics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "intragen/rng.hpp"

namespace intragen {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::collision: return "collision";
        case EventKind::pocket: return "pocket";
        case EventKind::topple: return "topple";
        case EventKind::exit_scene: return "exit";
        case EventKind::rest: return "rest";
    }
    return "?";
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::pool: return "pool";
        case Scenario::domino: return "domino";
        case Scenario::movi2d: return "movi2d";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "pool") return Scenario::pool;
    if (name == "domino") return Scenario::domino;
    if (name == "movi2d") return Scenario::movi2d;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

namespace {

EventKind event_kind_from_string(const std::string& name) {
    if (name == "collision") return EventKind::collision;
    if (name == "pocket") return EventKind::pocket;
    if (name == "topple") return EventKind::topple;
    if (name == "exit") return EventKind::exit_scene;
    if (name == "rest") return EventKind::rest;
    throw std::invalid_argument("unknown event kind '" + name + "'");
}

bool active(const Body& b) { return b.state == BodyState::moving || b.state == BodyState::resting; }

const char* body_class(Scenario s) {
    switch (s) {
        case Scenario::pool: return "ball";
        case Scenario::domino: return "domino";
        case Scenario::movi2d: return "disc";
    }
    return "?";
}

std::vector<Point> pool_pockets(int width, int height) {
    const double w = width - 1.0, h = height - 1.0;
    return {{0.0, 0.0}, {w, 0.0}, {0.0, h}, {w, h}, {w / 2.0, 0.0}, {w / 2.0, h}};
}

void validate_config(const SceneConfig& cfg) {
    if (cfg.width < 2 || cfg.height < 2) throw std::invalid_argument("dims too small");
    if (cfg.frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");
    if (cfg.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    if (cfg.restitution < 0.0 || cfg.restitution > 1.0)
        throw std::invalid_argument("restitution must be in [0, 1]");
    if (cfg.friction < 0.0) throw std::invalid_argument("friction must be >= 0");
    int max_objects = 0;
    int min_objects = 1;
    switch (cfg.scenario) {
        case Scenario::pool: max_objects = 16; break;
        case Scenario::domino: max_objects = 20; break;
        case Scenario::movi2d: max_objects = 10; break;
    }
    if (cfg.object_count < min_objects || cfg.object_count > max_objects) {
        std::ostringstream msg;
        msg << to_string(cfg.scenario) << " object count must be in [" << min_objects << ", "
            << max_objects << "], got " << cfg.object_count;
        throw std::invalid_argument(msg.str());
    }
}

void record_frame(TrajectorySet& set, const std::vector<Body>& bodies, int frame) {
    for (std::size_t k = 0; k < bodies.size(); ++k) {
        auto& t = set.trajectories[k];
        const Body& b = bodies[k];
        if (active(b)) {
            t.points[static_cast<std::size_t>(frame)] = b.position;
            t.visible[static_cast<std::size_t>(frame)] = true;
        } else {
            // keep last coordinates, stay invisible
            t.points[static_cast<std::size_t>(frame)] =
                frame > 0 ? t.points[static_cast<std::size_t>(frame - 1)] : b.position;
            t.visible[static_cast<std::size_t>(frame)] = false;
        }
    }
}

}  // namespace

Scene run_disc_simulation(const SceneConfig& cfg, std::vector<Body> bodies,
                          const DiscSimFeatures& features, std::vector<CollisionAudit>* audit) {
    validate_config(cfg);

    Scene scene;
    scene.config = cfg;
    scene.bodies = bodies;
    scene.trajectories.frame_count = cfg.frame_count;
    scene.trajectories.width = cfg.width;
    scene.trajectories.height = cfg.height;
    for (const auto& b : bodies) {
        Trajectory t;
        t.object_id = b.object_id;
        t.label = body_class(cfg.scenario);
        t.points.assign(static_cast<std::size_t>(cfg.frame_count), Point{});
        t.visible.assign(static_cast<std::size_t>(cfg.frame_count), false);
        scene.trajectories.trajectories.push_back(std::move(t));
    }

    const auto pockets = features.pockets ? pool_pockets(cfg.width, cfg.height) : std::vector<Point>{};
    const double pocket_radius =
        features.pocket_radius > 0.0
            ? features.pocket_radius
            : (bodies.empty() ? 0.0 : 1.8 * bodies.front().radius);

    record_frame(scene.trajectories, bodies, 0);

    const double dt = 1.0 / cfg.substeps;
    for (int frame = 1; frame < cfg.frame_count; ++frame) {
        for (int step = 0; step < cfg.substeps; ++step) {
            // integrate
            for (auto& b : bodies) {
                if (b.state != BodyState::moving) continue;
                b.position.x += b.velocity.dx * dt;
                b.position.y += b.velocity.dy * dt;
            }

            // pair collisions, fixed (i, j) order, few passes to settle overlaps
            for (int pass = 0; pass < 4; ++pass) {
                bool any = false;
                for (std::size_t i = 0; i < bodies.size(); ++i) {
                    if (!active(bodies[i])) continue;
                    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
                        if (!active(bodies[j])) continue;
                        Body& a = bodies[i];
                        Body& b = bodies[j];
                        const double nx0 = b.position.x - a.position.x;
                        const double ny0 = b.position.y - a.position.y;
                        const double dist2 = nx0 * nx0 + ny0 * ny0;
                        const double rsum = a.radius + b.radius;
                        if (dist2 >= rsum * rsum) continue;
                        const double dist = std::sqrt(dist2);
                        double nx, ny;
                        if (dist > 1e-12) {
                            nx = nx0 / dist;
                            ny = ny0 / dist;
                        } else {
                            nx = 1.0;
                            ny = 0.0;
                        }
                        const double rel_n = (b.velocity.dx - a.velocity.dx) * nx +
                                             (b.velocity.dy - a.velocity.dy) * ny;
                        const double inv_a = 1.0 / a.mass;
                        const double inv_b = 1.0 / b.mass;
                        if (rel_n < 0.0) {
                            CollisionAudit rec;
                            if (audit) {
                                rec.frame = frame;
                                rec.id_a = a.object_id;
                                rec.id_b = b.object_id;
                                rec.px_pre = a.mass * a.velocity.dx + b.mass * b.velocity.dx;
                                rec.py_pre = a.mass * a.velocity.dy + b.mass * b.velocity.dy;
                                rec.ke_pre = 0.5 * a.mass * (a.velocity.dx * a.velocity.dx +
                                                             a.velocity.dy * a.velocity.dy) +
                                             0.5 * b.mass * (b.velocity.dx * b.velocity.dx +
                                                             b.velocity.dy * b.velocity.dy);
                                rec.momentum_scale =
                                    a.mass * std::hypot(a.velocity.dx, a.velocity.dy) +
                                    b.mass * std::hypot(b.velocity.dx, b.velocity.dy);
                            }
                            const double impulse =
                                -(1.0 + cfg.restitution) * rel_n / (inv_a + inv_b);
                            a.velocity.dx -= impulse * inv_a * nx;
                            a.velocity.dy -= impulse * inv_a * ny;
                            b.velocity.dx += impulse * inv_b * nx;
                            b.velocity.dy += impulse * inv_b * ny;
                            a.state = BodyState::moving;
                            b.state = BodyState::moving;
                            if (audit) {
                                rec.px_post = a.mass * a.velocity.dx + b.mass * b.velocity.dx;
                                rec.py_post = a.mass * a.velocity.dy + b.mass * b.velocity.dy;
                                rec.ke_post = 0.5 * a.mass * (a.velocity.dx * a.velocity.dx +
                                                              a.velocity.dy * a.velocity.dy) +
                                              0.5 * b.mass * (b.velocity.dx * b.velocity.dx +
                                                              b.velocity.dy * b.velocity.dy);
                                audit->push_back(rec);
                            }
                            scene.events.push_back(
                                {frame, EventKind::collision, {a.object_id, b.object_id}});
                        }
                        // positional separation, split by inverse mass
                        const double overlap = rsum - dist;
                        if (overlap > 0.0) {
                            const double share_a = inv_a / (inv_a + inv_b);
                            const double share_b = inv_b / (inv_a + inv_b);
                            a.position.x -= nx * overlap * share_a;
                            a.position.y -= ny * overlap * share_a;
                            b.position.x += nx * overlap * share_b;
                            b.position.y += ny * overlap * share_b;
                            any = true;
                        }
                    }
                }
                if (!any) break;
            }

            // cushions / exits
            for (auto& b : bodies) {
                if (!active(b)) continue;
                if (features.cushions) {
                    const double lo_x = b.radius, hi_x = cfg.width - 1.0 - b.radius;
                    const double lo_y = b.radius, hi_y = cfg.height - 1.0 - b.radius;
                    if (b.position.x < lo_x) {
                        b.position.x = lo_x;
                        if (b.velocity.dx < 0.0) b.velocity.dx = -cfg.restitution * b.velocity.dx;
                    } else if (b.position.x > hi_x) {
                        b.position.x = hi_x;
                        if (b.velocity.dx > 0.0) b.velocity.dx = -cfg.restitution * b.velocity.dx;
                    }
                    if (b.position.y < lo_y) {
                        b.position.y = lo_y;
                        if (b.velocity.dy < 0.0) b.velocity.dy = -cfg.restitution * b.velocity.dy;
                    } else if (b.position.y > hi_y) {
                        b.position.y = hi_y;
                        if (b.velocity.dy > 0.0) b.velocity.dy = -cfg.restitution * b.velocity.dy;
                    }
                } else if (features.exit_at_boundary) {
                    if (b.position.x < 0.0 || b.position.x >= cfg.width || b.position.y < 0.0 ||
                        b.position.y >= cfg.height) {
                        b.state = BodyState::exited;
                        scene.events.push_back({frame, EventKind::exit_scene, {b.object_id}});
                    }
                }
            }

            // pockets
            if (features.pockets) {
                for (auto& b : bodies) {
                    if (!active(b)) continue;
                    for (const auto& p : pockets) {
                        const double dx = b.position.x - p.x;
                        const double dy = b.position.y - p.y;
                        if (dx * dx + dy * dy <= pocket_radius * pocket_radius) {
                            b.state = BodyState::captured;
                            scene.events.push_back({frame, EventKind::pocket, {b.object_id}});
                            break;
                        }
                    }
                }
            }

            // friction as exponential decay, rest below threshold
            for (auto& b : bodies) {
                if (b.state != BodyState::moving) continue;
                if (cfg.friction > 0.0) {
                    b.velocity.dx *= (1.0 - cfg.friction);
                    b.velocity.dy *= (1.0 - cfg.friction);
                }
                if (speed(b.velocity) < kRestSpeedEps) {
                    b.velocity = {0.0, 0.0};
                    b.state = BodyState::resting;
                    scene.events.push_back({frame, EventKind::rest, {b.object_id}});
                }
            }
        }
        record_frame(scene.trajectories, bodies, frame);
    }
    return scene;
}

namespace {

std::vector<Body> place_discs(const SceneConfig& cfg, double radius_lo, double radius_hi,
                              double speed_lo, double speed_hi, bool aim_at_interior,
                              bool keep_clear_of_pockets) {
    const auto pockets =
        keep_clear_of_pockets ? pool_pockets(cfg.width, cfg.height) : std::vector<Point>{};
    const IdPalette palette = assign_palette(cfg.object_count);

    std::vector<Body> bodies;
    for (int k = 0; k < cfg.object_count; ++k) {
        Rng rng(derive_stream(cfg.seed, "body", static_cast<std::uint64_t>(k)));
        Body b;
        b.object_id = k;
        b.color = palette.colors[static_cast<std::size_t>(k)];
        b.radius = radius_lo + (radius_hi - radius_lo) * rng.uniform();
        b.mass = b.radius * b.radius;
        const double pocket_radius = 1.8 * b.radius;

        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            const double margin = b.radius + 0.5;
            Point pos{rng.uniform(margin, cfg.width - 1.0 - margin),
                      rng.uniform(margin, cfg.height - 1.0 - margin)};
            bool ok = true;
            for (const auto& other : bodies) {
                const double dx = pos.x - other.position.x;
                const double dy = pos.y - other.position.y;
                const double min_dist = b.radius + other.radius + 1.0;
                if (dx * dx + dy * dy < min_dist * min_dist) {
                    ok = false;
                    break;
                }
            }
            for (const auto& p : pockets) {
                const double dx = pos.x - p.x;
                const double dy = pos.y - p.y;
                const double clear = pocket_radius + b.radius;
                if (ok && dx * dx + dy * dy < clear * clear) ok = false;
            }
            if (ok) {
                b.position = pos;
                placed = true;
            }
        }
        if (!placed) throw std::runtime_error("cannot place bodies");

        const double spd = rng.uniform(speed_lo, speed_hi);
        if (aim_at_interior) {
            // aim toward a random interior point; clusters paths and makes
            // crossings/collisions common
            const Point target{rng.uniform(0.25 * cfg.width, 0.75 * cfg.width),
                               rng.uniform(0.25 * cfg.height, 0.75 * cfg.height)};
            const double dx = target.x - b.position.x;
            const double dy = target.y - b.position.y;
            const double len = std::max(1e-9, std::hypot(dx, dy));
            b.velocity = {spd * dx / len, spd * dy / len};
        } else {
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            b.velocity = {spd * std::cos(theta), spd * std::sin(theta)};
        }
        bodies.push_back(b);
    }
    return bodies;
}

}  // namespace

Scene simulate_pool(const SceneConfig& cfg, std::vector<CollisionAudit>* audit) {
    validate_config(cfg);
    if (cfg.scenario != Scenario::pool) throw std::invalid_argument("scenario must be pool");
    const double r = std::max(2.0, 0.03 * std::min(cfg.width, cfg.height));
    auto bodies = place_discs(cfg, r, r, 1.0, 3.0, /*aim_at_interior=*/true,
                              /*keep_clear_of_pockets=*/true);
    DiscSimFeatures features;
    features.cushions = true;
    features.pockets = true;
    return run_disc_simulation(cfg, std::move(bodies), features, audit);
}

Scene simulate_movi2d(const SceneConfig& cfg, std::vector<CollisionAudit>* audit) {
    validate_config(cfg);
    if (cfg.scenario != Scenario::movi2d) throw std::invalid_argument("scenario must be movi2d");
    const double lo = std::max(1.5, 0.02 * std::min(cfg.width, cfg.height));
    const double hi = std::max(lo, 0.04 * std::min(cfg.width, cfg.height));
    auto bodies = place_discs(cfg, lo, hi, 0.5, 2.5, /*aim_at_interior=*/false,
                              /*keep_clear_of_pockets=*/false);
    DiscSimFeatures features;
    features.cushions = false;
    features.pockets = false;
    features.exit_at_boundary = true;
    return run_disc_simulation(cfg, std::move(bodies), features, audit);
}

Scene simulate_domino(const SceneConfig& cfg, const DominoOptions& opts) {
    validate_config(cfg);
    if (cfg.scenario != Scenario::domino) throw std::invalid_argument("scenario must be domino");

    const double dim = std::min(cfg.width, cfg.height);
    const double thickness = opts.thickness > 0.0 ? opts.thickness : std::max(1.0, 0.012 * dim);
    const double height = opts.height > 0.0 ? opts.height : 6.0 * thickness;
    const double spacing = opts.spacing > 0.0 ? opts.spacing : 3.0 * thickness;
    if (spacing < thickness) throw std::invalid_argument("invalid spacing");
    if (opts.topple_frames < 1) throw std::invalid_argument("topple duration must be >= 1");

    // base points along a seeded bounded-curvature path unless given explicitly
    std::vector<Point> base;
    if (opts.base_points) {
        base = *opts.base_points;
        if (static_cast<int>(base.size()) != cfg.object_count)
            throw std::invalid_argument("base point count must match object count");
    } else {
        Rng rng(derive_stream(cfg.seed, "domino-path"));
        const double margin = height + 2.0;
        Point pos{rng.uniform(margin, cfg.width - 1.0 - margin),
                  rng.uniform(margin, cfg.height - 1.0 - margin)};
        double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        for (int k = 0; k < cfg.object_count; ++k) {
            base.push_back(pos);
            heading += rng.uniform(-0.35, 0.35);
            Point next{pos.x + spacing * std::cos(heading), pos.y + spacing * std::sin(heading)};
            // steer back toward the center when the path would leave the safe area
            for (int tries = 0; tries < 16; ++tries) {
                if (next.x > margin && next.x < cfg.width - 1.0 - margin && next.y > margin &&
                    next.y < cfg.height - 1.0 - margin)
                    break;
                const double to_center = std::atan2(cfg.height / 2.0 - pos.y,
                                                    cfg.width / 2.0 - pos.x);
                heading = to_center + rng.uniform(-0.3, 0.3);
                next = {pos.x + spacing * std::cos(heading), pos.y + spacing * std::sin(heading)};
            }
            pos = next;
        }
    }

    // fall direction of domino k: toward the next base point, last one keeps
    // its predecessor's direction
    std::vector<Velocity> dir(base.size(), {1.0, 0.0});
    for (std::size_t k = 0; k + 1 < base.size(); ++k) {
        const double dx = base[k + 1].x - base[k].x;
        const double dy = base[k + 1].y - base[k].y;
        const double len = std::hypot(dx, dy);
        if (len > 1e-12) dir[k] = {dx / len, dy / len};
    }
    if (base.size() > 1) dir.back() = dir[base.size() - 2];

    // trigger times: contact once the falling top edge spans the gap
    const double half_pi = 1.5707963267948966;
    const double contact_angle = std::asin(std::min(1.0, spacing / height));
    const double contact_delay = opts.topple_frames * (contact_angle / half_pi);
    std::vector<double> trigger(base.size(), std::numeric_limits<double>::infinity());
    if (opts.trigger_first) {
        for (std::size_t k = 0; k < base.size(); ++k)
            trigger[k] = static_cast<double>(k) * contact_delay;
    }

    Scene scene;
    scene.config = cfg;
    scene.trajectories.frame_count = cfg.frame_count;
    scene.trajectories.width = cfg.width;
    scene.trajectories.height = cfg.height;

    const IdPalette palette = assign_palette(cfg.object_count);
    for (int k = 0; k < cfg.object_count; ++k) {
        Body b;
        b.object_id = k;
        b.position = base[static_cast<std::size_t>(k)];
        b.radius = std::max(1.0, thickness);
        b.mass = 1.0;
        b.state = BodyState::resting;
        b.color = palette.colors[static_cast<std::size_t>(k)];
        scene.bodies.push_back(b);

        Trajectory t;
        t.object_id = k;
        t.label = body_class(cfg.scenario);
        t.points.reserve(static_cast<std::size_t>(cfg.frame_count));
        t.visible.assign(static_cast<std::size_t>(cfg.frame_count), true);
        for (int f = 0; f < cfg.frame_count; ++f) {
            double phase = 0.0;
            if (static_cast<double>(f) >= trigger[static_cast<std::size_t>(k)])
                phase = std::min(1.0, (static_cast<double>(f) - trigger[static_cast<std::size_t>(k)]) /
                                          opts.topple_frames);
            const double swing = height * std::sin(phase * half_pi);
            t.points.push_back({base[static_cast<std::size_t>(k)].x +
                                    dir[static_cast<std::size_t>(k)].dx * swing,
                                base[static_cast<std::size_t>(k)].y +
                                    dir[static_cast<std::size_t>(k)].dy * swing});
        }
        scene.trajectories.trajectories.push_back(std::move(t));
    }

    for (std::size_t k = 0; k < base.size(); ++k) {
        if (!std::isfinite(trigger[k])) continue;
        const int frame = static_cast<int>(std::ceil(trigger[k] - 1e-9));
        if (frame < cfg.frame_count)
            scene.events.push_back({frame, EventKind::topple, {static_cast<int>(k)}});
    }
    return scene;
}

Scene simulate(const SceneConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::pool: return simulate_pool(cfg);
        case Scenario::domino: return simulate_domino(cfg);
        case Scenario::movi2d: return simulate_movi2d(cfg);
    }
    throw std::invalid_argument("unknown scenario");
}

IdPalette scene_palette(const Scene& scene) {
    std::vector<Body> sorted = scene.bodies;
    std::sort(sorted.begin(), sorted.end(),
              [](const Body& a, const Body& b) { return a.object_id < b.object_id; });
    IdPalette palette;
    for (const auto& b : sorted) palette.colors.push_back(b.color);
    return palette;
}

FrameStack render_scene(const Scene& scene, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1) throw std::invalid_argument("bad render resolution");
    const auto& set = scene.trajectories;
    const double sx = static_cast<double>(out_width) / set.width;
    const double sy = static_cast<double>(out_height) / set.height;
    const double sr = std::min(sx, sy);

    std::vector<std::size_t> order(scene.bodies.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.bodies[a].object_id < scene.bodies[b].object_id;
    });

    FrameStack frames;
    frames.reserve(static_cast<std::size_t>(set.frame_count));
    for (int f = 0; f < set.frame_count; ++f) {
        ImageU8 img(out_width, out_height);
        for (const std::size_t k : order) {
            const Body& b = scene.bodies[k];
            const Trajectory& t = set.trajectories[k];
            if (!t.visible[static_cast<std::size_t>(f)]) continue;
            const double cx = t.points[static_cast<std::size_t>(f)].x * sx;
            const double cy = t.points[static_cast<std::size_t>(f)].y * sy;
            const double radius = b.radius * sr;
            const std::uint8_t r8 = static_cast<std::uint8_t>(std::lround(b.color[0] * 255.0));
            const std::uint8_t g8 = static_cast<std::uint8_t>(std::lround(b.color[1] * 255.0));
            const std::uint8_t b8 = static_cast<std::uint8_t>(std::lround(b.color[2] * 255.0));
            const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
            const int x1 = std::min(out_width - 1, static_cast<int>(std::ceil(cx + radius)));
            const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
            const int y1 = std::min(out_height - 1, static_cast<int>(std::ceil(cy + radius)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - cx;
                    const double dy = y - cy;
                    if (dx * dx + dy * dy <= radius * radius) {
                        std::uint8_t* px = img.px(x, y);
                        px[0] = r8;
                        px[1] = g8;
                        px[2] = b8;
                    }
                }
        }
        frames.push_back(std::move(img));
    }
    return frames;
}

std::string scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["width"] = scene.trajectories.width;
    j["height"] = scene.trajectories.height;
    j["frame_count"] = scene.trajectories.frame_count;
    j["scenario"] = to_string(scene.config.scenario);
    j["seed"] = scene.config.seed;
    j["objects"] = nlohmann::json::array();
    for (std::size_t k = 0; k < scene.trajectories.trajectories.size(); ++k) {
        const auto& t = scene.trajectories.trajectories[k];
        nlohmann::json o;
        o["id"] = t.object_id;
        o["class"] = t.label;
        auto pts = nlohmann::json::array();
        for (const auto& p : t.points) pts.push_back({p.x, p.y});
        o["points"] = std::move(pts);
        o["visible"] = std::vector<bool>(t.visible.begin(), t.visible.end());
        if (k < scene.bodies.size()) {
            o["radius"] = scene.bodies[k].radius;
            o["color"] = {scene.bodies[k].color[0], scene.bodies[k].color[1],
                          scene.bodies[k].color[2]};
        }
        j["objects"].push_back(std::move(o));
    }
    j["events"] = nlohmann::json::array();
    for (const auto& e : scene.events) {
        nlohmann::json je;
        je["frame"] = e.frame;
        je["kind"] = to_string(e.kind);
        je["participants"] = e.participants;
        j["events"].push_back(std::move(je));
    }
    return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
    Scene scene;
    scene.trajectories = trajectory_set_from_json(text);
    nlohmann::json j = nlohmann::json::parse(text);
    scene.config.width = scene.trajectories.width;
    scene.config.height = scene.trajectories.height;
    scene.config.frame_count = scene.trajectories.frame_count;
    if (j.contains("scenario"))
        scene.config.scenario = scenario_from_string(j["scenario"].get<std::string>());
    if (j.contains("seed")) scene.config.seed = j["seed"].get<std::uint64_t>();
    scene.config.object_count = static_cast<int>(scene.trajectories.trajectories.size());

    const IdPalette fallback =
        scene.trajectories.empty()
            ? IdPalette{}
            : assign_palette(static_cast<int>(scene.trajectories.trajectories.size()));
    std::size_t k = 0;
    for (const auto& o : j.at("objects")) {
        Body b;
        b.object_id = scene.trajectories.trajectories[k].object_id;
        b.position = scene.trajectories.trajectories[k].points.empty()
                         ? Point{}
                         : scene.trajectories.trajectories[k].points.front();
        b.radius = o.value("radius", std::max(2.0, 0.03 * std::min(scene.config.width,
                                                                   scene.config.height)));
        if (o.contains("color")) {
            const auto& c = o["color"];
            b.color = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
        } else if (k < fallback.colors.size()) {
            b.color = fallback.colors[k];
        }
        scene.bodies.push_back(b);
        ++k;
    }
    if (j.contains("events")) {
        for (const auto& je : j["events"]) {
            SceneEvent e;
            e.frame = je.at("frame").get<int>();
            e.kind = event_kind_from_string(je.at("kind").get<std::string>());
            if (e.frame < 0 || e.frame >= scene.config.frame_count)
                throw std::invalid_argument("event frame out of range");
            for (const auto& p : je.at("participants")) e.participants.push_back(p.get<int>());
            scene.events.push_back(std::move(e));
        }
    }
    return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << scene_to_json(scene) << '\n';
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

}  // namespace intragen
