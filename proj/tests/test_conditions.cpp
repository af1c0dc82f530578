#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "intragen/conditions.hpp"
#include "intragen/rng.hpp"
#include "intragen/trajectory.hpp"

using namespace intragen;

namespace {

// independent HSV reference using the classic sector (i, f, p, q, t) form
Rgb hsv_oracle(double h, double s, double v) {
    if (s == 0.0) return {v, v, v};
    h = std::fmod(h, 360.0);
    if (h < 0) h += 360.0;
    h /= 60.0;
    const int i = static_cast<int>(std::floor(h)) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (i) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

double rgb_distance(const Rgb& a, const Rgb& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                     (a[2] - b[2]) * (a[2] - b[2]));
}

TrajectorySet two_frame_set(Point p0, Point p1, int w = 32, int h = 32) {
    TrajectorySet set;
    set.width = w;
    set.height = h;
    set.frame_count = 2;
    Trajectory t;
    t.object_id = 0;
    t.points = {p0, p1};
    t.visible = {true, true};
    set.trajectories.push_back(t);
    return set;
}

double channel_sum(const ImageF& img, int c) {
    double s = 0.0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) s += img.at(x, y, c);
    return s;
}

double frame_energy(const ImageF& img) {
    double s = 0.0;
    for (const double v : img.data) s += v;
    return s;
}

// non-separable brute-force Gaussian convolution with the same mirrored
// padding and truncated renormalized kernel
ImageF dense_blur_oracle(const ImageF& in, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int d = -radius; d <= radius; ++d) {
        k[static_cast<std::size_t>(d + radius)] =
            std::exp(-(double(d) * d) / (2 * sigma * sigma));
        sum += k[static_cast<std::size_t>(d + radius)];
    }
    for (auto& w : k) w /= sum;
    auto mirror = [](int i, int n) {
        if (n == 1) return 0;
        const int period = 2 * n;
        int m = i % period;
        if (m < 0) m += period;
        return m < n ? m : period - 1 - m;
    };
    ImageF out(in.width, in.height, in.channels);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            for (int c = 0; c < in.channels; ++c) {
                double acc = 0.0;
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx)
                        acc += k[static_cast<std::size_t>(dy + radius)] *
                               k[static_cast<std::size_t>(dx + radius)] *
                               in.at(mirror(x + dx, in.width), mirror(y + dy, in.height), c);
                out.at(x, y, c) = acc;
            }
    return out;
}

}  // namespace

TEST_CASE("velocity_to_color: HSV axis cases") {
    const double vmax = 2.0;
    const Rgb red = velocity_to_color({vmax, 0.0}, vmax);
    CHECK(red[0] == doctest::Approx(1.0));
    CHECK(red[1] == doctest::Approx(0.0));
    CHECK(red[2] == doctest::Approx(0.0));

    const Rgb white = velocity_to_color({0.0, 0.0}, vmax);
    CHECK(white[0] == doctest::Approx(1.0));
    CHECK(white[1] == doctest::Approx(1.0));
    CHECK(white[2] == doctest::Approx(1.0));
}

TEST_CASE("velocity_to_color: hue 90 at half saturation matches the HSV oracle") {
    const double vmax = 2.0;
    const Rgb got = velocity_to_color({0.0, vmax / 2.0}, vmax);
    const Rgb expect = hsv_oracle(90.0, 0.5, 1.0);
    for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-12));
    // hue 90, sat 0.5 region: green saturated, blue floored at 1 - s
    CHECK(got[1] == doctest::Approx(1.0));
    CHECK(got[2] == doctest::Approx(0.5));
    CHECK(got[0] > got[2]);
    CHECK(got[0] < got[1]);
}

TEST_CASE("velocity_to_color agrees with the oracle on random velocities") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const Velocity v{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double vmax = rng.uniform(0.5, 8.0);
        double hue = std::atan2(v.dy, v.dx) * 180.0 / 3.14159265358979323846;
        if (hue < 0) hue += 360.0;
        const Rgb expect = hsv_oracle(hue, std::min(1.0, speed(v) / vmax), 1.0);
        const Rgb got = velocity_to_color(v, vmax);
        for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(velocity_to_color({1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("assign_palette basics and spacing") {
    const auto p1 = assign_palette(1);
    REQUIRE(p1.colors.size() == 1);
    CHECK(p1.colors[0][0] == doctest::Approx(1.0));
    CHECK(p1.colors[0][1] == doctest::Approx(0.0));
    CHECK(p1.colors[0][2] == doctest::Approx(0.0));

    const auto p2 = assign_palette(2);
    CHECK(rgb_distance(p2.colors[0], {1, 0, 0}) < 1e-12);
    CHECK(rgb_distance(p2.colors[1], {0, 1, 1}) < 1e-12);

    const auto p20 = assign_palette(20);
    double min_dist = 10.0;
    for (std::size_t a = 0; a < p20.colors.size(); ++a)
        for (std::size_t b = a + 1; b < p20.colors.size(); ++b)
            min_dist = std::min(min_dist, rgb_distance(p20.colors[a], p20.colors[b]));
    CHECK(min_dist >= 0.2);

    CHECK_THROWS_AS(assign_palette(0), std::invalid_argument);
    CHECK_THROWS_AS(assign_palette(65), std::invalid_argument);
}

TEST_CASE("gaussian_blur: sigma 0 is bitwise identity") {
    Rng rng(3);
    ImageF img(9, 7, 3);
    for (auto& v : img.data) v = rng.uniform();
    const auto out = gaussian_blur(img, 0.0);
    REQUIRE(out.data.size() == img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("gaussian_blur: constant frame unchanged") {
    ImageF img(12, 10, 3);
    for (auto& v : img.data) v = 0.375;
    for (const double sigma : {0.5, 1.0, 2.0, 4.0}) {
        const auto out = gaussian_blur(img, sigma);
        for (const double v : out.data) CHECK(v == doctest::Approx(0.375).epsilon(1e-12));
    }
}

TEST_CASE("gaussian_blur matches the dense convolution oracle") {
    // 1D delta row
    ImageF row(5, 1, 1);
    row.at(2, 0, 0) = 1.0;
    const auto got = gaussian_blur(row, 1.0);
    const auto expect = dense_blur_oracle(row, 1.0);
    for (std::size_t i = 0; i < got.data.size(); ++i)
        CHECK(std::fabs(got.data[i] - expect.data[i]) <= 1e-12);

    // random 2D frames, including boundary effects
    Rng rng(8);
    for (int trial = 0; trial < 4; ++trial) {
        ImageF img(11, 9, 2);
        for (auto& v : img.data) v = rng.uniform();
        const double sigma = rng.uniform(0.4, 2.5);
        const auto a = gaussian_blur(img, sigma);
        const auto b = dense_blur_oracle(img, sigma);
        for (std::size_t i = 0; i < a.data.size(); ++i)
            CHECK(std::fabs(a.data[i] - b.data[i]) <= 1e-12);
    }
}

TEST_CASE("gaussian_blur preserves per-channel mass") {
    Rng rng(21);
    ImageF img(17, 13, 3);
    for (auto& v : img.data) v = rng.uniform();
    for (const double sigma : {0.8, 2.0, 5.0}) {
        const auto out = gaussian_blur(img, sigma);
        for (int c = 0; c < 3; ++c) {
            const double before = channel_sum(img, c);
            const double after = channel_sum(out, c);
            CHECK(std::fabs(after - before) / before <= 1e-6);
        }
    }
}

TEST_CASE("draw_sparse_pose: all-static scene is all black") {
    TrajectorySet set;
    set.width = 16;
    set.height = 16;
    set.frame_count = 5;
    for (int k = 0; k < 3; ++k) {
        Trajectory t;
        t.object_id = k;
        t.points.assign(5, {4.0 + 3 * k, 8.0});
        t.visible.assign(5, true);
        set.trajectories.push_back(t);
    }
    const auto stack = draw_sparse_pose(set, 2.0, 1, 2.0);
    REQUIRE(stack.frames.size() == 5);
    for (const auto& f : stack.frames)
        for (const double v : f.data) CHECK(v == 0.0);
}

TEST_CASE("draw_sparse_pose: rightward motion at v_max paints red discs") {
    TrajectorySet set;
    set.width = 32;
    set.height = 16;
    set.frame_count = 4;
    Trajectory t;
    t.object_id = 0;
    t.points = {{4, 8}, {6, 8}, {8, 8}, {10, 8}};
    t.visible.assign(4, true);
    set.trajectories.push_back(t);

    const auto stack = draw_sparse_pose(set, 2.0, 1, 0.0);
    // frame 0 black
    for (const double v : stack.frames[0].data) CHECK(v == 0.0);
    for (int f = 1; f < 4; ++f) {
        const auto& img = stack.frames[static_cast<std::size_t>(f)];
        const double cx = t.points[static_cast<std::size_t>(f)].x;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const double dx = x - cx, dy = y - 8.0;
                if (dx * dx + dy * dy <= 1.0) {
                    CHECK(img.at(x, y, 0) == doctest::Approx(1.0));
                    CHECK(img.at(x, y, 1) == doctest::Approx(0.0));
                    CHECK(img.at(x, y, 2) == doctest::Approx(0.0));
                } else {
                    CHECK(img.at(x, y, 0) == 0.0);
                }
            }
    }
}

TEST_CASE("draw_sparse_pose: blurred frame equals blur of the sharp frame") {
    TrajectorySet set = two_frame_set({10, 10}, {12, 10});
    const double sigma = 2.0;
    const auto sharp = draw_sparse_pose(set, 2.0, 1, 0.0);
    const auto blurred = draw_sparse_pose(set, 2.0, 1, sigma);
    for (int c = 0; c < 3; ++c)
        CHECK(channel_sum(blurred.frames[1], c) ==
              doctest::Approx(channel_sum(sharp.frames[1], c)).epsilon(1e-6));
    const auto expect = gaussian_blur(sharp.frames[1], sigma);
    for (std::size_t i = 0; i < expect.data.size(); ++i)
        CHECK(std::fabs(blurred.frames[1].data[i] - expect.data[i]) <= 1e-12);
}

TEST_CASE("draw_object_id: constancy for static and crossing objects") {
    TrajectorySet set;
    set.width = 32;
    set.height = 32;
    set.frame_count = 6;
    Trajectory a;  // static
    a.object_id = 0;
    a.points.assign(6, {8, 8});
    a.visible.assign(6, true);
    Trajectory b;  // crosses near a without fully covering it
    b.object_id = 1;
    for (int f = 0; f < 6; ++f) b.points.push_back({4.0 + 4 * f, 11.0});
    b.visible.assign(6, true);
    set.trajectories = {a, b};

    const auto palette = assign_palette(2);
    const auto stack = draw_object_id(set, palette, 2);
    REQUIRE(stack.frames.size() == 6);

    // every drawn pixel carries exactly one of the two palette colors, and
    // each object's contributed color set is a singleton
    for (int f = 0; f < 6; ++f) {
        const auto& img = stack.frames[static_cast<std::size_t>(f)];
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const Rgb px{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
                if (px[0] == 0.0 && px[1] == 0.0 && px[2] == 0.0) continue;
                const bool is_a = rgb_distance(px, palette.colors[0]) < 1e-12;
                const bool is_b = rgb_distance(px, palette.colors[1]) < 1e-12;
                CHECK(is_a != is_b);
            }
    }

    // both objects present every frame
    for (int f = 0; f < 6; ++f) {
        const auto& img = stack.frames[static_cast<std::size_t>(f)];
        for (int k = 0; k < 2; ++k) {
            bool found = false;
            for (int y = 0; y < img.height && !found; ++y)
                for (int x = 0; x < img.width && !found; ++x) {
                    const Rgb px{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
                    if (rgb_distance(px, palette.colors[static_cast<std::size_t>(k)]) < 1e-12)
                        found = true;
                }
            CHECK(found);
        }
    }
}

TEST_CASE("draw_object_id: invisible frames contribute nothing") {
    TrajectorySet set;
    set.width = 16;
    set.height = 16;
    set.frame_count = 4;
    Trajectory t;
    t.object_id = 0;
    t.points.assign(4, {8, 8});
    t.visible = {true, true, false, false};  // captured after frame 1
    set.trajectories.push_back(t);
    const auto stack = draw_object_id(set, assign_palette(1), 2);
    for (int f = 2; f < 4; ++f)
        for (const double v : stack.frames[static_cast<std::size_t>(f)].data) CHECK(v == 0.0);
    CHECK(frame_energy(stack.frames[0]) > 0.0);

    CHECK_THROWS_AS(draw_object_id(set, IdPalette{}, 2), std::invalid_argument);
}

TEST_CASE("hue equivariance under velocity rotation") {
    Rng rng(77);
    auto hue_of = [](const Rgb& c) {
        const double mx = std::max({c[0], c[1], c[2]});
        const double mn = std::min({c[0], c[1], c[2]});
        const double d = mx - mn;
        if (d == 0.0) return 0.0;
        double h;
        if (mx == c[0])
            h = std::fmod((c[1] - c[2]) / d, 6.0);
        else if (mx == c[1])
            h = (c[2] - c[0]) / d + 2.0;
        else
            h = (c[0] - c[1]) / d + 4.0;
        h *= 60.0;
        if (h < 0) h += 360.0;
        return h;
    };
    for (int trial = 0; trial < 100; ++trial) {
        Velocity v{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        if (speed(v) < 1e-6) continue;
        const double vmax = 4.0;
        const double base = hue_of(velocity_to_color(v, vmax));
        // exact quarter-turn rotations of the velocity vector
        const Velocity r90{-v.dy, v.dx};
        const Velocity r180{-v.dx, -v.dy};
        const Velocity r270{v.dy, -v.dx};
        const double h90 = hue_of(velocity_to_color(r90, vmax));
        const double h180 = hue_of(velocity_to_color(r180, vmax));
        const double h270 = hue_of(velocity_to_color(r270, vmax));
        auto wrap = [](double h) { return std::fmod(h + 720.0, 360.0); };
        CHECK(wrap(h90 - base) == doctest::Approx(90.0).epsilon(1e-6));
        CHECK(wrap(h180 - base) == doctest::Approx(180.0).epsilon(1e-6));
        CHECK(wrap(h270 - base) == doctest::Approx(270.0).epsilon(1e-6));
    }
    // 120-degree hue steps permute RGB channels exactly
    for (int trial = 0; trial < 50; ++trial) {
        const double h = rng.uniform(0.0, 360.0);
        const Rgb a = hsv_to_rgb(h, 1.0, 1.0);
        const Rgb b = hsv_to_rgb(h + 120.0, 1.0, 1.0);
        CHECK(b[1] == doctest::Approx(a[0]).epsilon(1e-12));
        CHECK(b[2] == doctest::Approx(a[1]).epsilon(1e-12));
        CHECK(b[0] == doctest::Approx(a[2]).epsilon(1e-12));
    }
}

TEST_CASE("condition drawing is deterministic") {
    TrajectorySet set = two_frame_set({5, 5}, {9, 7});
    const auto a = draw_sparse_pose(set, 3.0, 1, 1.5);
    const auto b = draw_sparse_pose(set, 3.0, 1, 1.5);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t f = 0; f < a.frames.size(); ++f)
        CHECK(a.frames[f].data == b.frames[f].data);
}
