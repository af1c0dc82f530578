#include "intragen/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace intragen {

Trajectory resample_polyline(const std::vector<Point>& polyline, int frame_count) {
    if (polyline.empty()) throw std::invalid_argument("empty polyline");
    if (frame_count < 1) throw std::invalid_argument("zero frames");

    Trajectory out;
    out.points.reserve(static_cast<std::size_t>(frame_count));
    out.visible.assign(static_cast<std::size_t>(frame_count), true);

    // cumulative arc length per vertex
    std::vector<double> arc(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const double dx = polyline[i].x - polyline[i - 1].x;
        const double dy = polyline[i].y - polyline[i - 1].y;
        arc[i] = arc[i - 1] + std::sqrt(dx * dx + dy * dy);
    }
    const double total = arc.back();

    if (total == 0.0) {
        // single vertex or fully degenerate polyline
        out.points.assign(static_cast<std::size_t>(frame_count), polyline.front());
        return out;
    }
    if (frame_count == 1) {
        out.points.push_back(polyline.front());
        return out;
    }

    std::size_t seg = 0;
    for (int f = 0; f < frame_count; ++f) {
        const double target = total * static_cast<double>(f) / static_cast<double>(frame_count - 1);
        while (seg + 2 < polyline.size() && arc[seg + 1] < target) ++seg;
        const double seg_len = arc[seg + 1] - arc[seg];
        const double t = seg_len > 0.0 ? std::clamp((target - arc[seg]) / seg_len, 0.0, 1.0) : 0.0;
        out.points.push_back({polyline[seg].x + t * (polyline[seg + 1].x - polyline[seg].x),
                              polyline[seg].y + t * (polyline[seg + 1].y - polyline[seg].y)});
    }
    return out;
}

std::vector<Velocity> diff(const Trajectory& traj) {
    if (traj.frame_count() < 2) throw std::invalid_argument("trajectory too short");
    std::vector<Velocity> out;
    out.reserve(traj.points.size() - 1);
    for (std::size_t i = 1; i < traj.points.size(); ++i)
        out.push_back({traj.points[i].x - traj.points[i - 1].x,
                       traj.points[i].y - traj.points[i - 1].y});
    return out;
}

std::vector<Velocity> cumulative_flow(const std::vector<Velocity>& vels) {
    std::vector<Velocity> out;
    out.reserve(vels.size() + 1);
    out.push_back({0.0, 0.0});
    for (const auto& v : vels)
        out.push_back({out.back().dx + v.dx, out.back().dy + v.dy});
    return out;
}

Trajectory clamp_to_frame(const Trajectory& traj, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("dims must be positive");
    Trajectory out = traj;
    for (auto& p : out.points) {
        p.x = std::clamp(p.x, 0.0, static_cast<double>(width - 1));
        p.y = std::clamp(p.y, 0.0, static_cast<double>(height - 1));
    }
    return out;
}

std::string to_json(const TrajectorySet& set) {
    nlohmann::json j;
    j["width"] = set.width;
    j["height"] = set.height;
    j["frame_count"] = set.frame_count;
    j["objects"] = nlohmann::json::array();
    for (const auto& t : set.trajectories) {
        nlohmann::json o;
        o["id"] = t.object_id;
        o["class"] = t.label;
        auto pts = nlohmann::json::array();
        for (const auto& p : t.points) pts.push_back({p.x, p.y});
        o["points"] = std::move(pts);
        o["visible"] = std::vector<bool>(t.visible.begin(), t.visible.end());
        j["objects"].push_back(std::move(o));
    }
    return j.dump(2);
}

TrajectorySet trajectory_set_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    TrajectorySet set;
    set.width = j.at("width").get<int>();
    set.height = j.at("height").get<int>();
    set.frame_count = j.at("frame_count").get<int>();
    if (set.frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");
    for (const auto& o : j.at("objects")) {
        Trajectory t;
        t.object_id = o.at("id").get<int>();
        if (t.object_id < 0) throw std::invalid_argument("object id must be non-negative");
        t.label = o.value("class", std::string{});
        for (const auto& p : o.at("points")) {
            if (!p.is_array() || p.size() != 2) throw std::invalid_argument("point must be [x, y]");
            t.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        for (const auto& v : o.at("visible")) t.visible.push_back(v.get<bool>());
        if (static_cast<int>(t.points.size()) != set.frame_count ||
            t.points.size() != t.visible.size()) {
            throw std::invalid_argument("object " + std::to_string(t.object_id) +
                                        ": points/visible length mismatch with frame_count");
        }
        set.trajectories.push_back(std::move(t));
    }
    for (std::size_t a = 0; a < set.trajectories.size(); ++a)
        for (std::size_t b = a + 1; b < set.trajectories.size(); ++b)
            if (set.trajectories[a].object_id == set.trajectories[b].object_id)
                throw std::invalid_argument("duplicate object id " +
                                            std::to_string(set.trajectories[a].object_id));
    return set;
}

TrajectorySet load_trajectory_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return trajectory_set_from_json(ss.str());
}

void save_trajectory_set(const TrajectorySet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(set) << '\n';
}

}  // namespace intragen
