#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "intragen/rng.hpp"
#include "intragen/trajectory.hpp"

using namespace intragen;

namespace {

Trajectory make_traj(std::vector<Point> pts) {
    Trajectory t;
    t.points = std::move(pts);
    t.visible.assign(t.points.size(), true);
    return t;
}

double polyline_arc_position(const std::vector<Point>& poly, const Point& p) {
    // distance along the polyline of the closest point, brute-force dense walk
    double best = 1e300, best_arc = 0.0, arc = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const double sx = poly[i].x, sy = poly[i].y;
        const double ex = poly[i + 1].x, ey = poly[i + 1].y;
        const double len = std::hypot(ex - sx, ey - sy);
        const int steps = 2000;
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const double qx = sx + t * (ex - sx);
            const double qy = sy + t * (ey - sy);
            const double d = std::hypot(p.x - qx, p.y - qy);
            if (d < best) {
                best = d;
                best_arc = arc + t * len;
            }
        }
        arc += len;
    }
    return best_arc;
}

}  // namespace

TEST_CASE("resample_polyline: straight segment at equal arc steps") {
    const auto t = resample_polyline({{0, 0}, {10, 0}}, 3);
    REQUIRE(t.frame_count() == 3);
    CHECK(t.points[0].x == doctest::Approx(0.0));
    CHECK(t.points[1].x == doctest::Approx(5.0));
    CHECK(t.points[2].x == doctest::Approx(10.0));
    for (const auto& p : t.points) CHECK(p.y == doctest::Approx(0.0));
    for (const bool v : t.visible) CHECK(v);
}

TEST_CASE("resample_polyline: degenerate single-point polyline") {
    const auto t = resample_polyline({{4, 4}}, 4);
    REQUIRE(t.frame_count() == 4);
    for (const auto& p : t.points) {
        CHECK(p.x == 4.0);
        CHECK(p.y == 4.0);
    }
}

TEST_CASE("resample_polyline: L-shaped polyline, arc position 4 lands at (3,1)") {
    const std::vector<Point> poly{{0, 0}, {3, 0}, {3, 4}};
    const auto t = resample_polyline(poly, 8);
    REQUIRE(t.frame_count() == 8);
    // arc length 7, samples at arc positions 0..7
    CHECK(t.points[4].x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(t.points[4].y == doctest::Approx(1.0).epsilon(1e-12));
    // cross-check every sample against a dense-walk arc-position oracle
    for (int f = 0; f < 8; ++f) {
        const double expected_arc = 7.0 * f / 7.0;
        CHECK(polyline_arc_position(poly, t.points[static_cast<std::size_t>(f)]) ==
              doctest::Approx(expected_arc).epsilon(1e-3));
    }
}

TEST_CASE("resample_polyline: errors") {
    CHECK_THROWS_WITH_AS(resample_polyline({}, 3), "empty polyline", std::invalid_argument);
    CHECK_THROWS_WITH_AS(resample_polyline({{1, 1}}, 0), "zero frames", std::invalid_argument);
}

TEST_CASE("resample_polyline: output length is F and spacing is uniform") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point> poly;
        const int verts = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < verts; ++i) poly.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
        const int frames = 1 + static_cast<int>(rng.below(40));
        const auto t = resample_polyline(poly, frames);
        REQUIRE(t.frame_count() == frames);
        if (frames < 3) continue;
        // measure spacing along the polyline itself
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < poly.size(); ++i)
            total += std::hypot(poly[i + 1].x - poly[i].x, poly[i + 1].y - poly[i].y);
        std::vector<double> arcs;
        for (const auto& p : t.points) arcs.push_back(polyline_arc_position(poly, p));
        for (std::size_t i = 0; i + 1 < arcs.size(); ++i) {
            const double gap = arcs[i + 1] - arcs[i];
            CHECK(std::fabs(gap - total / (frames - 1)) <= 1e-3 * total + 1e-9);
        }
    }
}

TEST_CASE("diff: arithmetic and 3-4-5 magnitude") {
    const auto v1 = diff(make_traj({{0, 0}, {1, 2}, {1, 2}}));
    REQUIRE(v1.size() == 2);
    CHECK(v1[0].dx == 1.0);
    CHECK(v1[0].dy == 2.0);
    CHECK(v1[1].dx == 0.0);
    CHECK(v1[1].dy == 0.0);

    const auto v2 = diff(make_traj({{5, 5}, {5, 5}, {5, 5}, {5, 5}}));
    for (const auto& v : v2) {
        CHECK(v.dx == 0.0);
        CHECK(v.dy == 0.0);
    }

    const auto v3 = diff(make_traj({{0, 0}, {3, 4}}));
    REQUIRE(v3.size() == 1);
    CHECK(speed(v3[0]) == doctest::Approx(5.0));
}

TEST_CASE("diff: too-short trajectory") {
    CHECK_THROWS_WITH_AS(diff(make_traj({{1, 1}})), "trajectory too short",
                         std::invalid_argument);
}

TEST_CASE("cumulative_flow: prefix sums") {
    const auto flow = cumulative_flow({{1, 0}, {1, 0}});
    REQUIRE(flow.size() == 3);
    CHECK(flow[0].dx == 0.0);
    CHECK(flow[1].dx == 1.0);
    CHECK(flow[2].dx == 2.0);

    const auto zero = cumulative_flow({{0, 0}, {0, 0}, {0, 0}});
    for (const auto& v : zero) {
        CHECK(v.dx == 0.0);
        CHECK(v.dy == 0.0);
    }

    CHECK(cumulative_flow({}).size() == 1);
}

TEST_CASE("cumulative_flow of diff reproduces displacements from frame 0") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Point> pts;
        const int frames = 2 + static_cast<int>(rng.below(30));
        for (int f = 0; f < frames; ++f)
            pts.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50)});
        const auto t = make_traj(pts);
        const auto flow = cumulative_flow(diff(t));
        REQUIRE(flow.size() == pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double ex = pts[i].x - pts[0].x;
            const double ey = pts[i].y - pts[0].y;
            const double scale = std::max({1.0, std::fabs(ex), std::fabs(ey)});
            CHECK(std::fabs(flow[i].dx - ex) / scale <= 1e-9);
            CHECK(std::fabs(flow[i].dy - ey) / scale <= 1e-9);
        }
    }
}

TEST_CASE("diff is translation invariant") {
    Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point> pts;
        const int frames = 2 + static_cast<int>(rng.below(12));
        for (int f = 0; f < frames; ++f) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
        const double cx = rng.uniform(-100, 100), cy = rng.uniform(-100, 100);
        std::vector<Point> shifted;
        for (const auto& p : pts) shifted.push_back({p.x + cx, p.y + cy});
        const auto va = diff(make_traj(pts));
        const auto vb = diff(make_traj(shifted));
        for (std::size_t i = 0; i < va.size(); ++i) {
            CHECK(va[i].dx == doctest::Approx(vb[i].dx).epsilon(1e-12));
            CHECK(va[i].dy == doctest::Approx(vb[i].dy).epsilon(1e-12));
        }
    }
}

TEST_CASE("clamp_to_frame") {
    auto t = make_traj({{-3, 5}, {8, 8}, {20.5, 16.0}});
    const auto c = clamp_to_frame(t, 16, 16);
    CHECK(c.points[0].x == 0.0);
    CHECK(c.points[0].y == 5.0);
    CHECK(c.points[1].x == 8.0);
    CHECK(c.points[1].y == 8.0);
    CHECK(c.points[2].x == 15.0);
    CHECK(c.points[2].y == 15.0);

    // in-bounds input is untouched
    auto inside = make_traj({{1, 1}, {14, 2}});
    const auto same = clamp_to_frame(inside, 16, 16);
    for (std::size_t i = 0; i < same.points.size(); ++i) {
        CHECK(same.points[i].x == inside.points[i].x);
        CHECK(same.points[i].y == inside.points[i].y);
    }
}

TEST_CASE("trajectory JSON round-trip and validation") {
    TrajectorySet set;
    set.width = 32;
    set.height = 24;
    set.frame_count = 3;
    Trajectory t = make_traj({{1.5, 2.25}, {3, 4}, {5, 6}});
    t.object_id = 7;
    t.label = "ball";
    t.visible[1] = false;
    set.trajectories.push_back(t);

    const auto text = to_json(set);
    const auto back = trajectory_set_from_json(text);
    REQUIRE(back.trajectories.size() == 1);
    CHECK(back.width == 32);
    CHECK(back.height == 24);
    CHECK(back.frame_count == 3);
    CHECK(back.trajectories[0].object_id == 7);
    CHECK(back.trajectories[0].label == "ball");
    CHECK(back.trajectories[0].points[0].x == 1.5);
    CHECK(back.trajectories[0].points[0].y == 2.25);
    CHECK_FALSE(back.trajectories[0].visible[1]);

    // length mismatches are rejected
    const std::string bad = R"({"width":8,"height":8,"frame_count":3,
        "objects":[{"id":0,"class":"x","points":[[0,0],[1,1]],"visible":[true,true,true]}]})";
    CHECK_THROWS_AS(trajectory_set_from_json(bad), std::invalid_argument);

    const std::string dup = R"({"width":8,"height":8,"frame_count":1,
        "objects":[{"id":0,"class":"x","points":[[0,0]],"visible":[true]},
                   {"id":0,"class":"y","points":[[1,1]],"visible":[true]}]})";
    CHECK_THROWS_AS(trajectory_set_from_json(dup), std::invalid_argument);
}
