#pragma once

#include <vector>

#include "intragen/image.hpp"

namespace intragen {

// Frame stacks as float images in [0, 1], identical shapes required.
using FloatStack = std::vector<ImageF>;

inline constexpr double kPsnrCapDb = 100.0;  // reported for identical inputs

// Per-frame 10*log10(1/MSE), capped at kPsnrCapDb, averaged over frames.
double psnr(const FloatStack& a, const FloatStack& b);

// SSIM with k1=0.01, k2=0.03 on 8x8 uniform tiles (partial edge tiles use
// their actual pixel count), averaged over tiles, frames and channels.
double ssim(const FloatStack& a, const FloatStack& b);

FloatStack to_float_stack(const FrameStack& frames);

}  // namespace intragen
