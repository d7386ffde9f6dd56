#pragma once

// Depth map preprocessing: register the sensor depth map onto the color
// camera's image plane, then close the holes left by registration and by
// the structured-light shadow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "depthfuse/calibration.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/parallel.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

/// Single-pass anisotropic diffusion parameters.
struct ADParams {
    double lambda = 0.25; // diffusion rate, stable for [0, 0.25]
    double K = 30.0;      // conduction scale, mm

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 0.25)) throw Error(Errc::invalid_argument, "lambda must lie in [0, 0.25]");
        if (!(K > 0.0)) throw Error(Errc::invalid_argument, "K must be positive");
    }
};

struct AlignStats {
    std::size_t projected = 0;
    std::size_t dropped_behind = 0;    // Z' <= 0 or unrepresentable after the transform
    std::size_t dropped_off_image = 0;
    std::size_t occluded = 0;          // lost a min-Z collision
};

/// Back-projects every valid pixel with the IR intrinsics, moves it into
/// the color frame and re-projects it. Collisions keep the nearest surface.
inline DepthMap align_depth(const DepthMap& raw, const CameraIntrinsics& ir, const CameraIntrinsics& color,
                            const Extrinsics& ext, Size out_size, AlignStats* stats = nullptr) {
    ir.validate();
    color.validate();
    ext.validate();
    DepthMap out(out_size, kInvalidDepth);
    AlignStats st;
    for (int v = 0; v < raw.height(); ++v) {
        for (int u = 0; u < raw.width(); ++u) {
            const std::uint16_t z = raw(u, v);
            if (z == kInvalidDepth) continue;
            const double Z = z;
            const double X = (u - ir.u0) * Z / ir.fx;
            const double Y = (v - ir.v0) * Z / ir.fy;
            const auto [Xc, Yc, Zc] = ext.apply(X, Y, Z);
            const double zr = std::round(Zc);
            if (!(Zc > 0.0) || zr < 1.0 || zr > 65535.0) {
                ++st.dropped_behind;
                continue;
            }
            const double up = std::round(Xc / Zc * color.fx + color.u0);
            const double vp = std::round(Yc / Zc * color.fy + color.v0);
            if (up < 0 || vp < 0 || up >= out_size.width || vp >= out_size.height) {
                ++st.dropped_off_image;
                continue;
            }
            auto& dst = out(static_cast<int>(up), static_cast<int>(vp));
            const auto zn = static_cast<std::uint16_t>(zr);
            if (dst == kInvalidDepth) {
                dst = zn;
                ++st.projected;
            } else {
                ++st.occluded;
                dst = std::min(dst, zn);
            }
        }
    }
    if (stats) *stats = st;
    return out;
}

inline DepthMap align_depth(const DepthMap& raw, const Calibration& calib, Size out_size,
                            AlignStats* stats = nullptr) {
    return align_depth(raw, calib.ir, calib.color, calib.extrinsics, out_size, stats);
}

/// 3x3 max-dilation written only into invalid pixels.
inline DepthMap dilate_fill(const DepthMap& aligned) {
    DepthMap out = aligned;
    const int w = aligned.width();
    const int h = aligned.height();
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            for (int x = 0; x < w; ++x) {
                if (aligned(x, y) != kInvalidDepth) continue;
                std::uint16_t m = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if (aligned.contains(x + dx, y + dy)) m = std::max(m, aligned(x + dx, y + dy));
                out(x, y) = m;
            }
        }
    });
    return out;
}

namespace detail {

inline double conduction(double d, double K) {
    const double r = d / K;
    return std::exp(-r * r);
}

// Nearest nonzero pixel along the row (left first, then right), else the
// column (up before down at equal distance).
inline std::optional<std::uint16_t> nearest_valid(const DepthMap& d, int x, int y) {
    for (int xl = x - 1; xl >= 0; --xl)
        if (d(xl, y) != kInvalidDepth) return d(xl, y);
    for (int xr = x + 1; xr < d.width(); ++xr)
        if (d(xr, y) != kInvalidDepth) return d(xr, y);
    for (int r = 1; r < d.height(); ++r) {
        if (y - r >= 0 && d(x, y - r) != kInvalidDepth) return d(x, y - r);
        if (y + r < d.height() && d(x, y + r) != kInvalidDepth) return d(x, y + r);
    }
    return std::nullopt;
}

} // namespace detail

struct HoleFillStats {
    std::size_t diffused = 0; // filled by the diffusion step
    std::size_t fallback = 0; // filled by nearest-valid search
};

/// One raster-order diffusion pass. Each hole at column x is predicted from
/// the reference pixel two columns to its left:
///
///   I(x) = I(x-2) + lambda * sum_n g(d_n) d_n,   g(d) = exp(-(d/K)^2)
///
/// with d_n the differences from I(x-2) to I(x-3), I(x-1), and the pixels
/// above and below I(x-2). Values already filled earlier in the pass are
/// used; neighbors that are off-image or still invalid contribute nothing.
/// Holes whose reference is unusable fall back to the nearest valid value.
inline DepthMap ad_hole_fill(const DepthMap& d, const ADParams& p, HoleFillStats* stats = nullptr) {
    p.validate();
    if (count_invalid(d) == d.pixel_count()) throw Error(Errc::no_valid_depth, "depth map has no valid pixel");
    DepthMap out = d;
    HoleFillStats st;
    const int w = d.width();
    const int h = d.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (out(x, y) != kInvalidDepth) continue;
            const int rx = x - 2;
            if (rx < 0 || out(rx, y) == kInvalidDepth) continue;
            const double ref = out(rx, y);
            double flux = 0.0;
            auto add = [&](int nx, int ny) {
                if (!out.contains(nx, ny) || out(nx, ny) == kInvalidDepth) return;
                const double diff = static_cast<double>(out(nx, ny)) - ref;
                flux += detail::conduction(diff, p.K) * diff;
            };
            add(rx - 1, y); // N
            add(rx + 1, y); // S
            add(rx, y - 1); // W
            add(rx, y + 1); // E
            const double v = std::round(ref + p.lambda * flux);
            out(x, y) = static_cast<std::uint16_t>(std::clamp(v, 1.0, 65535.0));
            ++st.diffused;
        }
    }
    // Fallback sweeps. After the first sweep every row that held a valid pixel
    // is complete, so a second sweep always finishes.
    while (count_invalid(out) != 0) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (out(x, y) != kInvalidDepth) continue;
                if (auto v = detail::nearest_valid(out, x, y)) {
                    out(x, y) = *v;
                    ++st.fallback;
                }
            }
    }
    if (stats) *stats = st;
    return out;
}

struct PreprocessStats {
    AlignStats align;
    std::size_t holes_after_align = 0;
    std::size_t holes_after_dilate = 0;
    HoleFillStats fill;
};

/// align_depth -> dilate_fill -> ad_hole_fill. The result has no invalid pixel.
inline DepthMap preprocess(const DepthMap& raw, const Calibration& calib, const ADParams& p, Size out_size,
                           PreprocessStats* stats = nullptr) {
    PreprocessStats st;
    DepthMap aligned = align_depth(raw, calib, out_size, &st.align);
    st.holes_after_align = count_invalid(aligned);
    DepthMap dilated = dilate_fill(aligned);
    st.holes_after_dilate = count_invalid(dilated);
    DepthMap filled = ad_hole_fill(dilated, p, &st.fill);
    if (stats) *stats = st;
    return filled;
}

inline DepthMap preprocess(const DepthMap& raw, const Calibration& calib, const ADParams& p,
                           PreprocessStats* stats = nullptr) {
    return preprocess(raw, calib, p, raw.size(), stats);
}

} // namespace depthfuse
