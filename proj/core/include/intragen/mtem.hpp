#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "intragen/conditions.hpp"
#include "intragen/image.hpp"
#include "intragen/trajectory.hpp"

namespace intragen {

struct DetectionRecord {
    int frame = 0;
    int object_id = 0;
    double x = 0.0;
    double y = 0.0;
};

// Dense |T1| x |T2| matrix of pairwise trajectory distances (pixels^2).
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;  // row-major

    double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

struct Matching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), min(rows, cols) of them
    double total_cost = 0.0;
    std::vector<std::size_t> unmatched;  // indices from the larger side
};

struct MtemScore {
    double raw_total = 0.0;           // pixels^2, sum over matched pairs
    double normalized_percent = 0.0;  // mean per-frame RMS displacement / frame diagonal * 100
    Matching pairs;
    int cardinality_penalty_count = 0;  // ||T1| - |T2||, reported alongside, not folded in
    std::vector<double> pair_distances;  // per matched pair, pixels^2
};

// One trajectory per distinct object_id; frames with a record are visible,
// duplicates per (object_id, frame) resolved by keeping the first.
TrajectorySet ingest_detections(const std::vector<DetectionRecord>& records, int frame_count,
                                int width, int height);

// Copy coordinates into invisible frames from the most recent visible frame;
// frames before the first detection take the first detection's position.
// Output is fully visible. Idempotent.
TrajectorySet fill_gaps(const TrajectorySet& set);

// Sum over frames of squared Euclidean same-frame distance (compensated
// summation, order-independent to ~1e-9 relative).
double traj_distance(const Trajectory& a, const Trajectory& b);

CostMatrix build_cost_matrix(const TrajectorySet& t1, const TrajectorySet& t2);

// Minimum-cost assignment of min(rows, cols) pairs; rectangular inputs padded
// internally with zero-cost dummies that are removed from the output. O(n^3).
Matching hungarian(const CostMatrix& cost);

MtemScore mtem_score(const TrajectorySet& ground_truth, const TrajectorySet& generated);

// Color-keyed centroid tracker over rendered frames: per frame and palette
// color, the centroid of pixels within RGB distance <= 0.25; fewer than 3
// matching pixels leaves that frame invisible. object_id = palette index.
TrajectorySet extract_trajectories_toy(const FrameStack& frames, const IdPalette& palette);

// Detection CSV: header `frame,object_id,x,y`.
std::vector<DetectionRecord> read_detection_csv(const std::string& path);
void write_detection_csv(const std::vector<DetectionRecord>& records, const std::string& path);
std::vector<DetectionRecord> detections_from_set(const TrajectorySet& set);

}  // namespace intragen
