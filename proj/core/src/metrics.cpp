#include "intragen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intragen {

namespace {

void check_shapes(const FloatStack& a, const FloatStack& b) {
    if (a.size() != b.size()) throw std::invalid_argument("frame counts differ");
    if (a.empty()) throw std::invalid_argument("empty frame stack");
    for (std::size_t f = 0; f < a.size(); ++f)
        if (a[f].width != b[f].width || a[f].height != b[f].height ||
            a[f].channels != b[f].channels || a[f].data.size() != b[f].data.size())
            throw std::invalid_argument("frame shapes differ");
}

}  // namespace

double psnr(const FloatStack& a, const FloatStack& b) {
    check_shapes(a, b);
    double acc = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        double se = 0.0;
        for (std::size_t i = 0; i < a[f].data.size(); ++i) {
            const double d = a[f].data[i] - b[f].data[i];
            se += d * d;
        }
        const double mse = se / static_cast<double>(a[f].data.size());
        const double db = mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : kPsnrCapDb;
        acc += std::min(db, kPsnrCapDb);
    }
    return acc / static_cast<double>(a.size());
}

double ssim(const FloatStack& a, const FloatStack& b) {
    check_shapes(a, b);
    constexpr double k1 = 0.01, k2 = 0.03;
    constexpr double c1 = k1 * k1, c2 = k2 * k2;  // dynamic range 1
    constexpr int tile = 8;

    double acc = 0.0;
    long windows = 0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        const ImageF& fa = a[f];
        const ImageF& fb = b[f];
        for (int c = 0; c < fa.channels; ++c)
            for (int ty = 0; ty < fa.height; ty += tile)
                for (int tx = 0; tx < fa.width; tx += tile) {
                    const int x1 = std::min(tx + tile, fa.width);
                    const int y1 = std::min(ty + tile, fa.height);
                    const double n = static_cast<double>((x1 - tx) * (y1 - ty));
                    double ma = 0.0, mb = 0.0;
                    for (int y = ty; y < y1; ++y)
                        for (int x = tx; x < x1; ++x) {
                            ma += fa.at(x, y, c);
                            mb += fb.at(x, y, c);
                        }
                    ma /= n;
                    mb /= n;
                    double va = 0.0, vb = 0.0, cov = 0.0;
                    for (int y = ty; y < y1; ++y)
                        for (int x = tx; x < x1; ++x) {
                            const double da = fa.at(x, y, c) - ma;
                            const double db = fb.at(x, y, c) - mb;
                            va += da * da;
                            vb += db * db;
                            cov += da * db;
                        }
                    va /= n;
                    vb /= n;
                    cov /= n;
                    const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
                    const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
                    acc += num / den;
                    ++windows;
                }
    }
    return acc / static_cast<double>(windows);
}

FloatStack to_float_stack(const FrameStack& frames) {
    FloatStack out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(to_float(f));
    return out;
}

}  // namespace intragen
