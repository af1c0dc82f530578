#pragma once

#include <array>
#include <vector>

#include "intragen/image.hpp"
#include "intragen/trajectory.hpp"

namespace intragen {

using Rgb = std::array<double, 3>;  // components in [0, 1]

enum class Modality { sparse_pose, object_id };

// Per-frame conditioning raster stack, components in [0, 1].
struct ConditionStack {
    Modality modality = Modality::sparse_pose;
    std::vector<ImageF> frames;
};

struct IdPalette {
    std::vector<Rgb> colors;  // indexed by object slot, pairwise distinct
};

// Objects slower than this (px/frame) are treated as static and not drawn
// into sparse-pose maps.
inline constexpr double kStaticSpeedEps = 1e-3;

// Standard HSV -> RGB, h in degrees [0, 360), s and v in [0, 1].
Rgb hsv_to_rgb(double h, double s, double v);

// Color-wheel encoding of a velocity: hue from the direction, saturation from
// speed relative to v_max (clamped at 1), value 1.
Rgb velocity_to_color(const Velocity& v, double v_max);

// n evenly spaced hues at full saturation and value; deterministic.
IdPalette assign_palette(int n);

// 99th percentile of per-frame speeds across all visible frames of the set;
// returns fallback when the set is entirely static.
double default_v_max(const TrajectorySet& set, double fallback = 1.0);

inline int default_point_radius(int width, int height) {
    const int r = static_cast<int>(std::lround(0.015 * std::min(width, height)));
    return std::max(1, r);
}

// Separable Gaussian, kernel truncated at radius ceil(3*sigma) and
// renormalized to sum 1, mirror (edge-inclusive) padding. sigma == 0 is the
// identity.
ImageF gaussian_blur(const ImageF& frame, double sigma);

// Velocity-colored discs at each moving object's per-frame position, frame 0
// black, each frame Gaussian-blurred. Static objects are not drawn.
ConditionStack draw_sparse_pose(const TrajectorySet& set, double v_max, int point_radius,
                                double sigma);

// Constant-color disc per visible object in every frame, no blur.
ConditionStack draw_object_id(const TrajectorySet& set, const IdPalette& palette,
                              int point_radius);

}  // namespace intragen
