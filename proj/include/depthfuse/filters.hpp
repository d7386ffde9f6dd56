#pragma once

// Spatial filters shared by the metrics and the simulator. All of them pad
// by replicating the border.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "depthfuse/raster.hpp"

namespace depthfuse {

/// Unit-sum sampled Gaussian, radius ceil(truncate * sigma).
inline std::vector<double> gaussian_kernel(double sigma, double truncate = 4.0) {
    if (!(sigma > 0.0)) return {1.0};
    const int r = std::max(1, static_cast<int>(std::ceil(truncate * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

/// Separable convolution of every channel with a symmetric odd-length kernel.
template <typename T, int C>
Raster<double, C> convolve_separable(const Raster<T, C>& src, const std::vector<double>& kernel) {
    const int r = static_cast<int>(kernel.size() / 2);
    const int w = src.width();
    const int h = src.height();
    Raster<double, C> tmp(src.size());
    Raster<double, C> out(src.size());
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < C; ++c) {
                    double acc = 0.0;
                    for (int k = -r; k <= r; ++k) acc += kernel[static_cast<std::size_t>(k + r)] * src.clamped(x + k, y, c);
                    tmp(x, y, c) = acc;
                }
    });
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < C; ++c) {
                    double acc = 0.0;
                    for (int k = -r; k <= r; ++k) acc += kernel[static_cast<std::size_t>(k + r)] * tmp.clamped(x, y + k, c);
                    out(x, y, c) = acc;
                }
    });
    return out;
}

inline GrayImage gaussian_blur(const GrayImage& g, double sigma) {
    if (!(sigma > 0.0)) return g;
    return convolve_separable(g, gaussian_kernel(sigma));
}

inline ColorImage gaussian_blur(const ColorImage& img, double sigma) {
    if (!(sigma > 0.0)) return img;
    const auto blurred = convolve_separable(img, gaussian_kernel(sigma));
    ColorImage out(img.size());
    for (std::size_t i = 0; i < blurred.samples().size(); ++i)
        out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::round(blurred.data()[i]), 0.0, 255.0));
    return out;
}

struct SobelResponse {
    GrayImage gx; // horizontal template [-1 0 1; -2 0 2; -1 0 1]
    GrayImage gy; // vertical template, its transpose
};

inline SobelResponse sobel(const GrayImage& g) {
    SobelResponse s{GrayImage(g.size()), GrayImage(g.size())};
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            auto p = [&](int dx, int dy) { return g.clamped(x + dx, y + dy); };
            s.gx(x, y) = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            s.gy(x, y) = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
        }
    return s;
}

/// Sums over every fully contained k x k window; the result is
/// (w - k + 1) x (h - k + 1) and indexed by the window's top-left corner.
inline GrayImage box_sums_valid(const GrayImage& g, int k) {
    const int ow = g.width() - k + 1;
    const int oh = g.height() - k + 1;
    GrayImage rows(Size{ow, g.height()});
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += g(x + i, y);
            rows(x, y) = acc;
        }
    GrayImage out(Size{ow, oh});
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += rows(x, y + i);
            out(x, y) = acc;
        }
    return out;
}

template <typename Op>
GrayImage combine(const GrayImage& a, const GrayImage& b, Op op) {
    require_same_size(a, b, "operand sizes differ");
    GrayImage out(a.size());
    for (std::size_t i = 0; i < a.pixel_count(); ++i) out.data()[i] = op(a.data()[i], b.data()[i]);
    return out;
}

inline double psnr(const ColorImage& a, const ColorImage& b, const Raster<std::uint8_t>* mask = nullptr) {
    require_same_size(a, b, "psnr operands differ in size");
    double se = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        if (mask && mask->data()[p] == 0) continue;
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = static_cast<double>(a.data()[3 * p + c]) - b.data()[3 * p + c];
            se += d * d;
        }
        n += 3;
    }
    if (n == 0) throw Error(Errc::empty_mask, "psnr mask selects no pixel");
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / (se / static_cast<double>(n)));
}

} // namespace depthfuse
