#include "intragen/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intragen {

Rgb hsv_to_rgb(double h, double s, double v) {
    h = std::fmod(h, 360.0);
    if (h < 0.0) h += 360.0;
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    if (hp < 1.0) {
        r = c; g = x;
    } else if (hp < 2.0) {
        r = x; g = c;
    } else if (hp < 3.0) {
        g = c; b = x;
    } else if (hp < 4.0) {
        g = x; b = c;
    } else if (hp < 5.0) {
        r = x; b = c;
    } else {
        r = c; b = x;
    }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

Rgb velocity_to_color(const Velocity& v, double v_max) {
    if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
    double hue = std::atan2(v.dy, v.dx) * (180.0 / 3.14159265358979323846);
    if (hue < 0.0) hue += 360.0;
    const double sat = std::min(1.0, speed(v) / v_max);
    return hsv_to_rgb(hue, sat, 1.0);
}

IdPalette assign_palette(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("palette size out of range [1, 64]");
    IdPalette p;
    p.colors.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        p.colors.push_back(hsv_to_rgb(360.0 * k / n, 1.0, 1.0));
    return p;
}

double default_v_max(const TrajectorySet& set, double fallback) {
    std::vector<double> speeds;
    for (const auto& t : set.trajectories) {
        if (t.frame_count() < 2) continue;
        const auto vels = diff(t);
        for (std::size_t i = 0; i < vels.size(); ++i)
            if (t.visible[i + 1]) speeds.push_back(speed(vels[i]));
    }
    if (speeds.empty()) return fallback;
    std::sort(speeds.begin(), speeds.end());
    // nearest-rank 99th percentile
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(speeds.size())));
    const double v = speeds[std::min(speeds.size() - 1, rank == 0 ? 0 : rank - 1)];
    return v > 0.0 ? v : fallback;
}

namespace {

// edge-inclusive mirror: ... 2 1 0 | 0 1 2 .. n-1 | n-1 n-2 ...
int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int d = -radius; d <= radius; ++d) {
        const double w = std::exp(-(static_cast<double>(d) * d) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(d + radius)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

void fill_disc(ImageF& frame, double cx, double cy, double radius, const Rgb& color) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cy + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy <= r2)
                for (int c = 0; c < 3; ++c) frame.at(x, y, c) = color[static_cast<std::size_t>(c)];
        }
}

}  // namespace

ImageF gaussian_blur(const ImageF& frame, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    if (sigma == 0.0) return frame;
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const int w = frame.width, h = frame.height, ch = frame.channels;

    // horizontal pass
    ImageF tmp(w, h, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    acc += kernel[static_cast<std::size_t>(d + radius)] *
                           frame.at(mirror_index(x + d, w), y, c);
                tmp.at(x, y, c) = acc;
            }
    // vertical pass
    ImageF out(w, h, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d)
                    acc += kernel[static_cast<std::size_t>(d + radius)] *
                           tmp.at(x, mirror_index(y + d, h), c);
                out.at(x, y, c) = acc;
            }
    return out;
}

ConditionStack draw_sparse_pose(const TrajectorySet& set, double v_max, int point_radius,
                                double sigma) {
    if (set.frame_count < 2) throw std::invalid_argument("sparse pose needs at least 2 frames");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
    for (const auto& t : set.trajectories)
        if (t.frame_count() != set.frame_count)
            throw std::invalid_argument("trajectory frame count mismatch");

    ConditionStack stack;
    stack.modality = Modality::sparse_pose;
    stack.frames.reserve(static_cast<std::size_t>(set.frame_count));
    stack.frames.emplace_back(set.width, set.height, 3);  // frame 0 stays black

    for (int f = 1; f < set.frame_count; ++f) {
        ImageF frame(set.width, set.height, 3);
        for (const auto& t : set.trajectories) {
            if (!t.visible[static_cast<std::size_t>(f)]) continue;
            const Velocity v{t.points[static_cast<std::size_t>(f)].x -
                                 t.points[static_cast<std::size_t>(f - 1)].x,
                             t.points[static_cast<std::size_t>(f)].y -
                                 t.points[static_cast<std::size_t>(f - 1)].y};
            if (speed(v) <= kStaticSpeedEps) continue;
            fill_disc(frame, t.points[static_cast<std::size_t>(f)].x,
                      t.points[static_cast<std::size_t>(f)].y, point_radius,
                      velocity_to_color(v, v_max));
        }
        stack.frames.push_back(sigma > 0.0 ? gaussian_blur(frame, sigma) : std::move(frame));
    }
    return stack;
}

ConditionStack draw_object_id(const TrajectorySet& set, const IdPalette& palette,
                              int point_radius) {
    for (const auto& t : set.trajectories) {
        if (t.object_id < 0 || static_cast<std::size_t>(t.object_id) >= palette.colors.size())
            throw std::invalid_argument("missing palette entry for object " +
                                        std::to_string(t.object_id));
        if (t.frame_count() != set.frame_count)
            throw std::invalid_argument("trajectory frame count mismatch");
    }

    ConditionStack stack;
    stack.modality = Modality::object_id;
    stack.frames.reserve(static_cast<std::size_t>(set.frame_count));
    for (int f = 0; f < set.frame_count; ++f) {
        ImageF frame(set.width, set.height, 3);
        for (const auto& t : set.trajectories) {
            if (!t.visible[static_cast<std::size_t>(f)]) continue;
            fill_disc(frame, t.points[static_cast<std::size_t>(f)].x,
                      t.points[static_cast<std::size_t>(f)].y, point_radius,
                      palette.colors[static_cast<std::size_t>(t.object_id)]);
        }
        stack.frames.push_back(std::move(frame));
    }
    return stack;
}

}  // namespace intragen
