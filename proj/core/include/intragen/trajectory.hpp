#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace intragen {

// Continuous pixel coordinates, origin top-left, x rightward, y downward.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Velocity {
    double dx = 0.0;
    double dy = 0.0;
};

inline double speed(const Velocity& v) { return std::sqrt(v.dx * v.dx + v.dy * v.dy); }

// Per-object path over frames 0..F-1. points and visible always have length F;
// invisible frames keep their last meaningful coordinates.
struct Trajectory {
    int object_id = 0;
    std::string label;  // serialized as "class"
    std::vector<Point> points;
    std::vector<bool> visible;

    int frame_count() const { return static_cast<int>(points.size()); }
};

struct TrajectorySet {
    int frame_count = 0;
    int width = 0;
    int height = 0;
    std::vector<Trajectory> trajectories;

    bool empty() const { return trajectories.empty(); }
    std::size_t size() const { return trajectories.size(); }
};

// F points at equal arc-length intervals along the polyline, endpoints
// included. A single-point polyline yields F copies. All frames visible.
Trajectory resample_polyline(const std::vector<Point>& polyline, int frame_count);

// Adjacent point differences; out[i] = p[i+1] - p[i], length F-1.
std::vector<Velocity> diff(const Trajectory& traj);

// Prefix sums of velocities: displacement from the first frame, length F
// (one more than the input), starting at (0, 0).
std::vector<Velocity> cumulative_flow(const std::vector<Velocity>& vels);

// Clamp every point into [0, W-1] x [0, H-1]; visibility untouched.
Trajectory clamp_to_frame(const Trajectory& traj, int width, int height);

// JSON schema:
//   {"width":int,"height":int,"frame_count":int,
//    "objects":[{"id":int,"class":str,"points":[[x,y],...],"visible":[bool,...]}]}
// Readers reject length mismatches. Extra per-object fields are preserved by
// scene-level I/O (physics.hpp) but ignored here.
std::string to_json(const TrajectorySet& set);
TrajectorySet trajectory_set_from_json(const std::string& text);
TrajectorySet load_trajectory_set(const std::string& path);
void save_trajectory_set(const TrajectorySet& set, const std::string& path);

}  // namespace intragen
