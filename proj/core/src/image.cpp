#include "intragen/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace intragen {

ImageF to_float(const ImageU8& img) {
    ImageF out(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = static_cast<double>(img.data[i]) / 255.0;
    return out;
}

ImageU8 to_u8(const ImageF& img) {
    if (img.channels != 3) throw std::invalid_argument("to_u8 expects 3 channels");
    ImageU8 out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        out.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return out;
}

void write_ppm(const ImageU8& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

namespace {

int read_ppm_token(std::istream& in) {
    // skip whitespace and '#' comments between header fields
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw std::runtime_error("malformed PPM header");
    return value;
}

}  // namespace

ImageU8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') throw std::runtime_error(path + ": not a P6 PPM");
    const int w = read_ppm_token(in);
    const int h = read_ppm_token(in);
    const int maxval = read_ppm_token(in);
    if (maxval != 255) throw std::runtime_error(path + ": unsupported maxval");
    if (w <= 0 || h <= 0) throw std::runtime_error(path + ": bad dimensions");
    ImageU8 img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw std::runtime_error(path + ": truncated pixel data");
    return img;
}

}  // namespace intragen
