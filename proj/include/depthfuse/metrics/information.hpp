#pragma once

// Information-theoretic fusion metrics: normalized mutual information and
// nonlinear correlation information entropy. Both work on 256-bin
// histograms of the intensity rounded to [0, 255].

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "depthfuse/error.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

inline constexpr int kHistogramBins = 256;

namespace detail {

inline int intensity_bin(double v) {
    const double r = std::round(v);
    return r <= 0 ? 0 : (r >= 255 ? 255 : static_cast<int>(r));
}

inline std::vector<int> bin_indices(const GrayImage& g) {
    std::vector<int> out(g.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = intensity_bin(g.data()[i]);
    return out;
}

/// Shannon entropy of a count histogram in the given log base.
template <typename Counts>
double entropy(const Counts& counts, double total, double log_base) {
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
    }
    return h / std::log(log_base);
}

struct PairEntropies {
    double hx = 0.0;
    double hy = 0.0;
    double hxy = 0.0;
};

inline PairEntropies pair_entropies(const std::vector<int>& x, const std::vector<int>& y, double log_base) {
    std::array<std::size_t, kHistogramBins> hx{};
    std::array<std::size_t, kHistogramBins> hy{};
    std::vector<std::size_t> joint(static_cast<std::size_t>(kHistogramBins) * kHistogramBins, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++hx[static_cast<std::size_t>(x[i])];
        ++hy[static_cast<std::size_t>(y[i])];
        ++joint[static_cast<std::size_t>(x[i]) * kHistogramBins + static_cast<std::size_t>(y[i])];
    }
    const auto n = static_cast<double>(x.size());
    return {entropy(hx, n, log_base), entropy(hy, n, log_base), entropy(joint, n, log_base)};
}

} // namespace detail

/// Q_MI = 2 [ MI(A,F)/(H(A)+H(F)) + MI(B,F)/(H(B)+H(F)) ], entropies in bits.
/// A term whose denominator vanishes (both images constant) takes the value
/// 1/2 it has for identical images, keeping Q_MI in [0, 2].
inline double q_mi(const GrayImage& a, const GrayImage& b, const GrayImage& f) {
    require_same_size(a, f, "Q_MI inputs differ in size");
    require_same_size(b, f, "Q_MI inputs differ in size");
    const auto xa = detail::bin_indices(a);
    const auto xb = detail::bin_indices(b);
    const auto xf = detail::bin_indices(f);
    auto term = [](const detail::PairEntropies& e) {
        const double denom = e.hx + e.hy;
        if (denom <= 0.0) return 0.5;
        return (e.hx + e.hy - e.hxy) / denom;
    };
    return 2.0 * (term(detail::pair_entropies(xa, xf, 2.0)) + term(detail::pair_entropies(xb, xf, 2.0)));
}

/// Eigenvalues of a symmetric 3x3 matrix via the trigonometric solution of
/// its characteristic cubic, in descending order.
inline std::array<double, 3> symmetric_eigenvalues(const std::array<double, 9>& m) {
    const double p1 = m[1] * m[1] + m[2] * m[2] + m[5] * m[5];
    if (p1 == 0.0) {
        std::array<double, 3> d{m[0], m[4], m[8]};
        std::sort(d.begin(), d.end(), std::greater<>());
        return d;
    }
    const double q = (m[0] + m[4] + m[8]) / 3.0;
    const double p2 = (m[0] - q) * (m[0] - q) + (m[4] - q) * (m[4] - q) + (m[8] - q) * (m[8] - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    std::array<double, 9> b{};
    for (int i = 0; i < 9; ++i) b[i] = (m[i] - (i % 4 == 0 ? q : 0.0)) / p;
    const double det = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6]) +
                       b[2] * (b[3] * b[7] - b[4] * b[6]);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};
}

/// Nonlinear correlation coefficient NCC(X,Y) = H'(X) + H'(Y) - H'(X,Y)
/// with entropies in base 256.
inline double nonlinear_correlation(const GrayImage& x, const GrayImage& y) {
    require_same_size(x, y, "NCC inputs differ in size");
    const auto e = detail::pair_entropies(detail::bin_indices(x), detail::bin_indices(y), kHistogramBins);
    return e.hx + e.hy - e.hxy;
}

/// Q_NCIE from the eigenvalues of the 3x3 nonlinear correlation matrix of
/// (A, B, F) with unit diagonal; 0 log 0 = 0.
inline double q_ncie(const GrayImage& a, const GrayImage& b, const GrayImage& f) {
    require_same_size(a, f, "Q_NCIE inputs differ in size");
    require_same_size(b, f, "Q_NCIE inputs differ in size");
    const double ab = nonlinear_correlation(a, b);
    const double af = nonlinear_correlation(a, f);
    const double bf = nonlinear_correlation(b, f);
    const std::array<double, 9> r{1.0, ab, af, ab, 1.0, bf, af, bf, 1.0};
    double q = 1.0;
    for (double lambda : symmetric_eigenvalues(r)) {
        const double t = lambda / 3.0;
        if (t > 0.0) q += t * std::log(t) / std::log(static_cast<double>(kHistogramBins));
    }
    return q;
}

} // namespace depthfuse
