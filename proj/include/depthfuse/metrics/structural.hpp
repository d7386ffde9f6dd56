#pragma once

// Yang et al. SSIM-based fusion metric over 7x7 windows.

#include <algorithm>
#include <cmath>

#include "depthfuse/error.hpp"
#include "depthfuse/filters.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

struct QyParams {
    int window = 7;
    double dynamic_range = 255.0;
    double k1 = 0.01;
    double k2 = 0.03;
    double similarity_threshold = 0.75;
};

namespace detail {

inline double ssim_from_moments(double mx, double my, double vx, double vy, double cxy, double c1, double c2) {
    return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

} // namespace detail

/// Mean over every fully contained window of
///   lambda SSIM(A,F) + (1 - lambda) SSIM(B,F)   if SSIM(A,B) >= 0.75
///   max(SSIM(A,F), SSIM(B,F))                   otherwise
/// with lambda = var(A) / (var(A) + var(B)), or 1/2 when both are zero.
inline double q_y(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QyParams& p = {}) {
    require_same_size(a, f, "Q_Y inputs differ in size");
    require_same_size(b, f, "Q_Y inputs differ in size");
    if (f.width() < p.window || f.height() < p.window)
        throw Error(Errc::image_too_small, "image is smaller than the SSIM window");
    const int k = p.window;
    const double n = static_cast<double>(k) * k;
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

    auto prod = [](const GrayImage& x, const GrayImage& y) { return combine(x, y, [](double u, double v) { return u * v; }); };
    const GrayImage sa = box_sums_valid(a, k), sb = box_sums_valid(b, k), sf = box_sums_valid(f, k);
    const GrayImage saa = box_sums_valid(prod(a, a), k), sbb = box_sums_valid(prod(b, b), k),
                    sff = box_sums_valid(prod(f, f), k);
    const GrayImage sab = box_sums_valid(prod(a, b), k), saf = box_sums_valid(prod(a, f), k),
                    sbf = box_sums_valid(prod(b, f), k);

    double total = 0.0;
    const std::size_t windows = sa.pixel_count();
    for (std::size_t i = 0; i < windows; ++i) {
        const double ma = sa.data()[i] / n, mb = sb.data()[i] / n, mf = sf.data()[i] / n;
        const double va = std::max(0.0, saa.data()[i] / n - ma * ma);
        const double vb = std::max(0.0, sbb.data()[i] / n - mb * mb);
        const double vf = std::max(0.0, sff.data()[i] / n - mf * mf);
        const double cab = sab.data()[i] / n - ma * mb;
        const double caf = saf.data()[i] / n - ma * mf;
        const double cbf = sbf.data()[i] / n - mb * mf;
        const double ssim_ab = detail::ssim_from_moments(ma, mb, va, vb, cab, c1, c2);
        const double ssim_af = detail::ssim_from_moments(ma, mf, va, vf, caf, c1, c2);
        const double ssim_bf = detail::ssim_from_moments(mb, mf, vb, vf, cbf, c1, c2);
        if (ssim_ab >= p.similarity_threshold) {
            const double lambda = (va + vb) > 0.0 ? va / (va + vb) : 0.5;
            total += lambda * ssim_af + (1.0 - lambda) * ssim_bf;
        } else {
            total += std::max(ssim_af, ssim_bf);
        }
    }
    return total / static_cast<double>(windows);
}

} // namespace depthfuse
