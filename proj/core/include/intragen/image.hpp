#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace intragen {

// 8-bit RGB raster, row-major, 3 interleaved channels. Pixel (x, y) samples
// the point at integer coordinates (x, y) in the frame coordinate system.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // height * width * 3

    ImageU8() = default;
    ImageU8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* px(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* px(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

// Floating-point raster with C interleaved channels, components in [0, 1]
// unless stated otherwise.
struct ImageF {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;  // height * width * channels

    ImageF() = default;
    ImageF(int w, int h, int c)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

ImageF to_float(const ImageU8& img);   // u8/255
ImageU8 to_u8(const ImageF& img);      // round(clamp01(v)*255); requires 3 channels

// Binary PPM (P6, maxval 255).
void write_ppm(const ImageU8& img, const std::string& path);
ImageU8 read_ppm(const std::string& path);

// Stacks are ordered by frame index.
using FrameStack = std::vector<ImageU8>;

}  // namespace intragen
