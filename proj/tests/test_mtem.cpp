#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "intragen/mtem.hpp"
#include "intragen/rng.hpp"

using namespace intragen;

namespace {

Trajectory const_traj(int id, Point p, int frames) {
    Trajectory t;
    t.object_id = id;
    t.points.assign(static_cast<std::size_t>(frames), p);
    t.visible.assign(static_cast<std::size_t>(frames), true);
    return t;
}

TrajectorySet random_filled_set(Rng& rng, int objects, int frames, int w, int h) {
    TrajectorySet set;
    set.frame_count = frames;
    set.width = w;
    set.height = h;
    for (int k = 0; k < objects; ++k) {
        Trajectory t;
        t.object_id = k;
        for (int f = 0; f < frames; ++f)
            t.points.push_back({rng.uniform(0, w - 1), rng.uniform(0, h - 1)});
        t.visible.assign(static_cast<std::size_t>(frames), true);
        set.trajectories.push_back(std::move(t));
    }
    return set;
}

// exhaustive assignment minimum over all permutations (n <= 7)
double brute_force_min_cost(const CostMatrix& cost) {
    const bool transposed = cost.rows > cost.cols;
    const std::size_t rows = transposed ? cost.cols : cost.rows;
    const std::size_t cols = transposed ? cost.rows : cost.cols;
    auto at = [&](std::size_t i, std::size_t j) {
        return transposed ? cost.at(j, i) : cost.at(i, j);
    };
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < rows; ++i) total += at(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("ingest_detections: full coverage, empty input, interleaved ids") {
    std::vector<DetectionRecord> records;
    for (int f = 0; f < 4; ++f) records.push_back({f, 3, 1.0 * f, 2.0 * f});
    auto set = ingest_detections(records, 4, 32, 32);
    REQUIRE(set.trajectories.size() == 1);
    CHECK(set.trajectories[0].object_id == 3);
    for (int f = 0; f < 4; ++f) {
        CHECK(set.trajectories[0].visible[static_cast<std::size_t>(f)]);
        CHECK(set.trajectories[0].points[static_cast<std::size_t>(f)].x == 1.0 * f);
    }

    CHECK(ingest_detections({}, 4, 32, 32).trajectories.empty());

    // interleaved two-id stream against a hash-join oracle
    Rng rng(5);
    std::vector<DetectionRecord> mixed;
    std::map<std::pair<int, int>, Point> oracle;
    for (int f = 0; f < 10; ++f)
        for (int id : {7, 2}) {
            DetectionRecord r{f, id, rng.uniform(0, 31), rng.uniform(0, 31)};
            mixed.push_back(r);
            oracle[{id, f}] = {r.x, r.y};
        }
    auto two = ingest_detections(mixed, 10, 32, 32);
    REQUIRE(two.trajectories.size() == 2);
    CHECK(two.trajectories[0].object_id == 2);  // sorted by id
    CHECK(two.trajectories[1].object_id == 7);
    for (const auto& t : two.trajectories)
        for (int f = 0; f < 10; ++f) {
            const auto& expect = oracle[{t.object_id, f}];
            CHECK(t.points[static_cast<std::size_t>(f)].x == expect.x);
            CHECK(t.points[static_cast<std::size_t>(f)].y == expect.y);
        }

    // duplicates keep the first record
    auto dup = ingest_detections({{0, 1, 5, 5}, {0, 1, 9, 9}}, 1, 32, 32);
    CHECK(dup.trajectories[0].points[0].x == 5.0);

    CHECK_THROWS_WITH_AS(ingest_detections({{9, 1, 0, 0}}, 4, 32, 32),
                         doctest::Contains("frame 9"), std::invalid_argument);
}

TEST_CASE("fill_gaps: most-recent rule and backward fill") {
    TrajectorySet set;
    set.frame_count = 3;
    set.width = set.height = 16;
    Trajectory t;
    t.object_id = 0;
    t.points = {{1, 1}, {0, 0}, {5, 5}};
    t.visible = {true, false, true};
    set.trajectories.push_back(t);
    auto filled = fill_gaps(set);
    CHECK(filled.trajectories[0].points[1].x == 1.0);
    CHECK(filled.trajectories[0].points[1].y == 1.0);
    for (const bool v : filled.trajectories[0].visible) CHECK(v);

    // first detection at frame 3 of 5: frames 0-2 take the frame-3 position
    TrajectorySet late;
    late.frame_count = 5;
    late.width = late.height = 16;
    Trajectory lt;
    lt.object_id = 0;
    lt.points = {{0, 0}, {0, 0}, {0, 0}, {7, 8}, {9, 9}};
    lt.visible = {false, false, false, true, true};
    late.trajectories.push_back(lt);
    auto lf = fill_gaps(late);
    for (int f = 0; f < 3; ++f) {
        CHECK(lf.trajectories[0].points[static_cast<std::size_t>(f)].x == 7.0);
        CHECK(lf.trajectories[0].points[static_cast<std::size_t>(f)].y == 8.0);
    }

    // zero detections is an error
    TrajectorySet empty;
    empty.frame_count = 2;
    empty.width = empty.height = 8;
    Trajectory et;
    et.object_id = 4;
    et.points.assign(2, Point{});
    et.visible.assign(2, false);
    empty.trajectories.push_back(et);
    CHECK_THROWS_WITH_AS(fill_gaps(empty), doctest::Contains("undetectable"),
                         std::invalid_argument);
}

TEST_CASE("fill_gaps: random masks match a forward-scan oracle; idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int frames = 2 + static_cast<int>(rng.below(20));
        TrajectorySet set;
        set.frame_count = frames;
        set.width = set.height = 64;
        Trajectory t;
        t.object_id = 0;
        bool any = false;
        for (int f = 0; f < frames; ++f) {
            t.points.push_back({rng.uniform(0, 63), rng.uniform(0, 63)});
            const bool vis = rng.uniform() < 0.5;
            t.visible.push_back(vis);
            any |= vis;
        }
        if (!any) t.visible[static_cast<std::size_t>(rng.below(frames))] = true;
        set.trajectories.push_back(t);

        const auto filled = fill_gaps(set);
        // forward-scan oracle
        int first = -1;
        for (int f = 0; f < frames; ++f)
            if (t.visible[static_cast<std::size_t>(f)]) {
                first = f;
                break;
            }
        Point last = t.points[static_cast<std::size_t>(first)];
        for (int f = 0; f < frames; ++f) {
            Point expect;
            if (f < first) {
                expect = t.points[static_cast<std::size_t>(first)];
            } else if (t.visible[static_cast<std::size_t>(f)]) {
                expect = t.points[static_cast<std::size_t>(f)];
                last = expect;
            } else {
                expect = last;
            }
            CHECK(filled.trajectories[0].points[static_cast<std::size_t>(f)].x == expect.x);
            CHECK(filled.trajectories[0].points[static_cast<std::size_t>(f)].y == expect.y);
            CHECK(filled.trajectories[0].visible[static_cast<std::size_t>(f)]);
        }
        // idempotence
        const auto twice = fill_gaps(filled);
        for (int f = 0; f < frames; ++f)
            CHECK(twice.trajectories[0].points[static_cast<std::size_t>(f)].x ==
                  filled.trajectories[0].points[static_cast<std::size_t>(f)].x);
    }
}

TEST_CASE("traj_distance: identity, constant offset, symmetry") {
    const auto a = const_traj(0, {3, 4}, 10);
    CHECK(traj_distance(a, a) == 0.0);

    const auto b = const_traj(1, {6, 8}, 10);  // offset (3,4), squared norm 25
    CHECK(traj_distance(a, b) == doctest::Approx(250.0));
    CHECK(traj_distance(b, a) == doctest::Approx(250.0));

    auto c = const_traj(2, {0, 0}, 9);
    CHECK_THROWS_AS(traj_distance(a, c), std::invalid_argument);
}

TEST_CASE("traj_distance matches a long-double accumulation oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int frames = 1 + static_cast<int>(rng.below(200));
        Trajectory a, b;
        a.object_id = 0;
        b.object_id = 1;
        long double expect = 0.0L;
        for (int f = 0; f < frames; ++f) {
            const Point pa{rng.uniform(0, 1000), rng.uniform(0, 1000)};
            const Point pb{rng.uniform(0, 1000), rng.uniform(0, 1000)};
            a.points.push_back(pa);
            b.points.push_back(pb);
            const long double dx = pa.x - pb.x, dy = pa.y - pb.y;
            expect += dx * dx + dy * dy;
        }
        a.visible.assign(a.points.size(), true);
        b.visible.assign(b.points.size(), true);
        const double got = traj_distance(a, b);
        CHECK(std::fabs(got - static_cast<double>(expect)) / static_cast<double>(expect) <= 1e-9);
    }
}

TEST_CASE("hungarian: basic examples") {
    CostMatrix m;
    m.rows = m.cols = 2;
    m.entries = {1, 2, 2, 1};
    const auto match = hungarian(m);
    REQUIRE(match.pairs.size() == 2);
    CHECK(match.total_cost == doctest::Approx(2.0));
    for (const auto& [i, j] : match.pairs) CHECK(i == j);

    CostMatrix one;
    one.rows = one.cols = 1;
    one.entries = {7};
    const auto m1 = hungarian(one);
    REQUIRE(m1.pairs.size() == 1);
    CHECK(m1.pairs[0].first == 0);
    CHECK(m1.pairs[0].second == 0);
    CHECK(m1.total_cost == doctest::Approx(7.0));

    CostMatrix bad;
    bad.rows = bad.cols = 1;
    bad.entries = {std::nan("")};
    CHECK_THROWS_AS(hungarian(bad), std::invalid_argument);
}

TEST_CASE("hungarian equals the exhaustive minimum on random matrices") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        CostMatrix m;
        m.rows = 1 + rng.below(7);
        m.cols = 1 + rng.below(7);
        m.entries.resize(m.rows * m.cols);
        for (auto& e : m.entries) e = rng.uniform(0, 100);
        const auto match = hungarian(m);
        CHECK(match.pairs.size() == std::min(m.rows, m.cols));
        CHECK(match.total_cost == doctest::Approx(brute_force_min_cost(m)).epsilon(1e-12));
        CHECK(match.unmatched.size() ==
              std::max(m.rows, m.cols) - std::min(m.rows, m.cols));
        // matched pair cost sum equals total
        double sum = 0.0;
        for (const auto& [i, j] : match.pairs) sum += m.at(i, j);
        CHECK(sum == doctest::Approx(match.total_cost));
    }
}

TEST_CASE("hungarian: row/column constant shifts keep the argmin structure") {
    Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        CostMatrix m;
        m.rows = m.cols = 2 + rng.below(5);
        m.entries.resize(m.rows * m.cols);
        for (auto& e : m.entries) e = rng.uniform(0, 50);
        const auto base = hungarian(m);

        CostMatrix shifted = m;
        const std::size_t row = rng.below(m.rows);
        const double c = rng.uniform(0, 20);
        for (std::size_t j = 0; j < m.cols; ++j) shifted.at(row, j) += c;
        const auto after = hungarian(shifted);
        CHECK(after.total_cost == doctest::Approx(base.total_cost + c).epsilon(1e-9));
        auto sorted_pairs = [](Matching m2) {
            std::sort(m2.pairs.begin(), m2.pairs.end());
            return m2.pairs;
        };
        CHECK(sorted_pairs(base) == sorted_pairs(after));
    }
}

TEST_CASE("mtem_score: self comparison, closed-form offset, id permutation") {
    Rng rng(17);
    auto gt = random_filled_set(rng, 3, 12, 64, 48);
    const auto self = mtem_score(gt, gt);
    CHECK(self.normalized_percent == 0.0);
    CHECK(self.raw_total == 0.0);
    CHECK(self.cardinality_penalty_count == 0);

    // single object, constant offset of diag/10 -> exactly 10 percent
    const double diag = std::hypot(64.0, 48.0);
    TrajectorySet a, b;
    a.frame_count = b.frame_count = 10;
    a.width = b.width = 64;
    a.height = b.height = 48;
    a.trajectories.push_back(const_traj(0, {10, 10}, 10));
    b.trajectories.push_back(const_traj(0, {10 + diag / 10.0, 10}, 10));
    const auto off = mtem_score(a, b);
    CHECK(std::fabs(off.normalized_percent - 10.0) <= 1e-9);

    // permuted ids with identical geometry score zero
    auto permuted = gt;
    std::rotate(permuted.trajectories.begin(), permuted.trajectories.begin() + 1,
                permuted.trajectories.end());
    for (std::size_t k = 0; k < permuted.trajectories.size(); ++k)
        permuted.trajectories[k].object_id = static_cast<int>(100 + k);
    CHECK(mtem_score(gt, permuted).normalized_percent == 0.0);

    // symmetry
    auto gen = random_filled_set(rng, 3, 12, 64, 48);
    CHECK(mtem_score(gt, gen).normalized_percent ==
          doctest::Approx(mtem_score(gen, gt).normalized_percent).epsilon(1e-12));

    TrajectorySet empty;
    empty.frame_count = 12;
    empty.width = 64;
    empty.height = 48;
    CHECK_THROWS_AS(mtem_score(gt, empty), std::invalid_argument);
}

TEST_CASE("mtem_score: cardinality mismatch is surfaced, not folded in") {
    Rng rng(23);
    auto gt = random_filled_set(rng, 4, 8, 32, 32);
    auto gen = random_filled_set(rng, 2, 8, 32, 32);
    const auto score = mtem_score(gt, gen);
    CHECK(score.cardinality_penalty_count == 2);
    CHECK(score.pairs.pairs.size() == 2);
    CHECK(score.pairs.unmatched.size() == 2);
    CHECK(score.pair_distances.size() == 2);
}

TEST_CASE("mtem_score grows monotonically under uniform corruption") {
    Rng rng(404);
    const auto gt = random_filled_set(rng, 3, 10, 100, 100);
    const std::vector<double> magnitudes{0.5, 2.0, 8.0};
    std::vector<double> means;
    for (const double mag : magnitudes) {
        double acc = 0.0;
        int n = 0;
        for (int seed = 0; seed < 120; ++seed) {
            Rng noise(derive_stream(9000 + seed, "corruption"));
            auto gen = gt;
            for (auto& t : gen.trajectories)
                for (auto& p : t.points) {
                    p.x += noise.uniform(-mag, mag);
                    p.y += noise.uniform(-mag, mag);
                }
            acc += mtem_score(gt, gen).normalized_percent;
            ++n;
        }
        means.push_back(acc / n);
    }
    CHECK(means[0] < means[1]);
    CHECK(means[1] < means[2]);
}

TEST_CASE("detection CSV round-trip") {
    std::vector<DetectionRecord> records{{0, 1, 1.5, 2.5}, {1, 1, 3.0, 4.0}, {0, 2, 9.25, 0.125}};
    const std::string path = "detections_test.csv";
    write_detection_csv(records, path);
    const auto back = read_detection_csv(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].frame == records[i].frame);
        CHECK(back[i].object_id == records[i].object_id);
        CHECK(back[i].x == records[i].x);
        CHECK(back[i].y == records[i].y);
    }
    std::remove(path.c_str());
}
