#include "intragen/mtem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace intragen {

TrajectorySet ingest_detections(const std::vector<DetectionRecord>& records, int frame_count,
                                int width, int height) {
    if (frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");
    for (const auto& r : records) {
        if (r.frame < 0 || r.frame >= frame_count) {
            std::ostringstream msg;
            msg << "detection out of range: frame " << r.frame << " of object " << r.object_id
                << " (valid frames [0, " << frame_count << "))";
            throw std::invalid_argument(msg.str());
        }
        if (!std::isfinite(r.x) || !std::isfinite(r.y))
            throw std::invalid_argument("non-finite detection coordinates for object " +
                                        std::to_string(r.object_id));
    }

    std::map<int, Trajectory> by_id;  // ordered so output is sorted by object_id
    for (const auto& r : records) {
        auto [it, inserted] = by_id.try_emplace(r.object_id);
        if (inserted) {
            it->second.object_id = r.object_id;
            it->second.points.assign(static_cast<std::size_t>(frame_count), Point{});
            it->second.visible.assign(static_cast<std::size_t>(frame_count), false);
        }
        auto& t = it->second;
        if (t.visible[static_cast<std::size_t>(r.frame)]) continue;  // keep the first
        t.points[static_cast<std::size_t>(r.frame)] = {r.x, r.y};
        t.visible[static_cast<std::size_t>(r.frame)] = true;
    }

    TrajectorySet set;
    set.frame_count = frame_count;
    set.width = width;
    set.height = height;
    for (auto& [id, t] : by_id) set.trajectories.push_back(std::move(t));
    return set;
}

TrajectorySet fill_gaps(const TrajectorySet& set) {
    TrajectorySet out = set;
    for (auto& t : out.trajectories) {
        int first_visible = -1;
        for (int f = 0; f < t.frame_count(); ++f)
            if (t.visible[static_cast<std::size_t>(f)]) {
                first_visible = f;
                break;
            }
        if (first_visible < 0)
            throw std::invalid_argument("undetectable object " + std::to_string(t.object_id));
        for (int f = 0; f < first_visible; ++f)
            t.points[static_cast<std::size_t>(f)] = t.points[static_cast<std::size_t>(first_visible)];
        for (int f = first_visible + 1; f < t.frame_count(); ++f)
            if (!t.visible[static_cast<std::size_t>(f)])
                t.points[static_cast<std::size_t>(f)] = t.points[static_cast<std::size_t>(f - 1)];
        t.visible.assign(t.visible.size(), true);
    }
    return out;
}

double traj_distance(const Trajectory& a, const Trajectory& b) {
    if (a.frame_count() != b.frame_count())
        throw std::invalid_argument("trajectory frame counts differ");
    // Kahan compensated summation
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const double dx = a.points[i].x - b.points[i].x;
        const double dy = a.points[i].y - b.points[i].y;
        const double term = dx * dx + dy * dy;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

CostMatrix build_cost_matrix(const TrajectorySet& t1, const TrajectorySet& t2) {
    CostMatrix m;
    m.rows = t1.trajectories.size();
    m.cols = t2.trajectories.size();
    m.entries.resize(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            m.at(i, j) = traj_distance(t1.trajectories[i], t2.trajectories[j]);
    return m;
}

namespace {

// Jonker-Volgenant style shortest augmenting path assignment on a square
// matrix, O(n^3). Returns row -> column.
std::vector<int> solve_square_assignment(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row, 1-based
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (match[static_cast<std::size_t>(j)] != 0)
            row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

}  // namespace

Matching hungarian(const CostMatrix& cost) {
    for (const double e : cost.entries) {
        if (std::isnan(e)) throw std::invalid_argument("NaN entry in cost matrix");
        if (e < 0.0) throw std::invalid_argument("negative entry in cost matrix");
    }
    Matching result;
    if (cost.rows == 0 || cost.cols == 0) return result;

    const int n = static_cast<int>(std::max(cost.rows, cost.cols));
    std::vector<double> padded(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t i = 0; i < cost.rows; ++i)
        for (std::size_t j = 0; j < cost.cols; ++j)
            padded[i * static_cast<std::size_t>(n) + j] = cost.at(i, j);

    const auto row_to_col = solve_square_assignment(padded, n);

    std::vector<char> col_matched(cost.cols, 0);
    std::vector<char> row_matched(cost.rows, 0);
    double total = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < cost.rows; ++i) {
        const int j = row_to_col[i];
        if (j < 0 || static_cast<std::size_t>(j) >= cost.cols) continue;  // dummy column
        result.pairs.emplace_back(i, static_cast<std::size_t>(j));
        row_matched[i] = 1;
        col_matched[static_cast<std::size_t>(j)] = 1;
        const double y = cost.at(i, static_cast<std::size_t>(j)) - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    result.total_cost = total;
    if (cost.rows > cost.cols) {
        for (std::size_t i = 0; i < cost.rows; ++i)
            if (!row_matched[i]) result.unmatched.push_back(i);
    } else if (cost.cols > cost.rows) {
        for (std::size_t j = 0; j < cost.cols; ++j)
            if (!col_matched[j]) result.unmatched.push_back(j);
    }
    return result;
}

MtemScore mtem_score(const TrajectorySet& ground_truth, const TrajectorySet& generated) {
    if (ground_truth.empty() || generated.empty())
        throw std::invalid_argument("trajectory set is empty");
    if (ground_truth.frame_count != generated.frame_count)
        throw std::invalid_argument("frame counts differ");
    if (ground_truth.width != generated.width || ground_truth.height != generated.height)
        throw std::invalid_argument("frame dims differ");
    for (const auto* set : {&ground_truth, &generated})
        for (const auto& t : set->trajectories)
            for (const bool vis : t.visible)
                if (!vis) throw std::invalid_argument("trajectory set is not gap-filled");

    MtemScore score;
    const CostMatrix cost = build_cost_matrix(ground_truth, generated);
    score.pairs = hungarian(cost);
    score.raw_total = score.pairs.total_cost;
    score.cardinality_penalty_count = static_cast<int>(
        std::max(cost.rows, cost.cols) - std::min(cost.rows, cost.cols));

    const double diag = std::sqrt(static_cast<double>(ground_truth.width) * ground_truth.width +
                                  static_cast<double>(ground_truth.height) * ground_truth.height);
    const double frames = static_cast<double>(ground_truth.frame_count);
    double acc = 0.0;
    for (const auto& [i, j] : score.pairs.pairs) {
        const double d = cost.at(i, j);
        score.pair_distances.push_back(d);
        acc += std::sqrt(d / frames) / diag;
    }
    score.normalized_percent =
        score.pairs.pairs.empty() ? 0.0 : 100.0 * acc / static_cast<double>(score.pairs.pairs.size());
    return score;
}

TrajectorySet extract_trajectories_toy(const FrameStack& frames, const IdPalette& palette) {
    if (palette.colors.empty()) throw std::invalid_argument("empty palette");
    TrajectorySet set;
    set.frame_count = static_cast<int>(frames.size());
    if (!frames.empty()) {
        set.width = frames.front().width;
        set.height = frames.front().height;
    }
    set.trajectories.resize(palette.colors.size());
    for (std::size_t k = 0; k < palette.colors.size(); ++k) {
        auto& t = set.trajectories[k];
        t.object_id = static_cast<int>(k);
        t.points.assign(frames.size(), Point{});
        t.visible.assign(frames.size(), false);
    }

    constexpr double kMatchDistance = 0.25;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& img = frames[f];
        for (std::size_t k = 0; k < palette.colors.size(); ++k) {
            const Rgb& c = palette.colors[k];
            double sx = 0.0, sy = 0.0;
            long count = 0;
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) {
                    const std::uint8_t* p = img.px(x, y);
                    const double dr = p[0] / 255.0 - c[0];
                    const double dg = p[1] / 255.0 - c[1];
                    const double db = p[2] / 255.0 - c[2];
                    if (dr * dr + dg * dg + db * db <= kMatchDistance * kMatchDistance) {
                        sx += x;
                        sy += y;
                        ++count;
                    }
                }
            if (count >= 3) {
                set.trajectories[k].points[f] = {sx / count, sy / count};
                set.trajectories[k].visible[f] = true;
            }
        }
    }
    return set;
}

std::vector<DetectionRecord> read_detection_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        return s;
    };
    if (strip(line) != "frame,object_id,x,y")
        throw std::runtime_error(path + ": expected header 'frame,object_id,x,y'");
    std::vector<DetectionRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        std::istringstream ss(line);
        DetectionRecord r;
        char c1, c2, c3;
        if (!(ss >> r.frame >> c1 >> r.object_id >> c2 >> r.x >> c3 >> r.y) || c1 != ',' ||
            c2 != ',' || c3 != ',')
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed record");
        records.push_back(r);
    }
    return records;
}

void write_detection_csv(const std::vector<DetectionRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "frame,object_id,x,y\n";
    out.precision(17);
    for (const auto& r : records)
        out << r.frame << ',' << r.object_id << ',' << r.x << ',' << r.y << '\n';
}

std::vector<DetectionRecord> detections_from_set(const TrajectorySet& set) {
    std::vector<DetectionRecord> records;
    for (const auto& t : set.trajectories)
        for (int f = 0; f < t.frame_count(); ++f)
            if (t.visible[static_cast<std::size_t>(f)])
                records.push_back({f, t.object_id, t.points[static_cast<std::size_t>(f)].x,
                                   t.points[static_cast<std::size_t>(f)].y});
    return records;
}

}  // namespace intragen
