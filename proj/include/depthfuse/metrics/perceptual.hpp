#pragma once

// Chen-Blum human-perception fusion metric:
//   1. contrast-sensitivity filtering in the frequency domain,
//   2. Peli band-limited contrast G_2 * I / G_4 * I - 1,
//   3. masking nonlinearity C' = t C^p / (h C^q + Z),
//   4. saliency lambda_A = C'_A^2 / (C'_A^2 + C'_B^2),
//   5. preservation min(C'_X, C'_F) / max(C'_X, C'_F), averaged over the
//      saliency-weighted quality map.

#include <cmath>
#include <complex>
#include <vector>

#include "depthfuse/detail/fft.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/filters.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

enum class ContrastSensitivity { dog, mannos_sakrison, barten };

struct QcbParams {
    ContrastSensitivity csf = ContrastSensitivity::dog;
    double sigma_k = 2.0; // pyramid level k; level k+1 uses 2 sigma_k
    double t = 1.0;
    double h = 1.0;
    double p = 3.0;
    double q = 2.0;
    double Z = 0.0001;

    void validate() const {
        if (!(sigma_k > 0.0) || !(Z > 0.0)) throw Error(Errc::invalid_argument, "sigma_k and Z must be positive");
    }
};

/// CSF gain at radial frequency r (cycles per degree under a 15-degree
/// field of view per image side).
inline double contrast_sensitivity(double r, ContrastSensitivity kind) {
    switch (kind) {
    case ContrastSensitivity::dog: {
        constexpr double f0 = 15.3870, f1 = 1.3456, a = 0.7622;
        return std::exp(-(r / f0) * (r / f0)) - a * std::exp(-(r / f1) * (r / f1));
    }
    case ContrastSensitivity::mannos_sakrison:
        return 2.6 * (0.0192 + 0.114 * r) * std::exp(-std::pow(0.114 * r, 1.1));
    case ContrastSensitivity::barten: {
        // Barten's model at 100 cd/m^2 and a 15-degree field, held at its peak
        // value below the peak frequency so the DC level survives filtering.
        auto barten = [](double f) {
            constexpr double L = 100.0, w = 15.0;
            const double a = 540.0 * std::pow(1.0 + 0.7 / L, -0.2) / (1.0 + 12.0 / (w * (1.0 + f / 3.0) * (1.0 + f / 3.0)));
            const double b = 0.3 * std::pow(1.0 + 100.0 / L, 0.15);
            return a * f * std::exp(-b * f) * std::sqrt(1.0 + 0.06 * std::exp(b * f));
        };
        constexpr double peak = 3.0;
        return barten(std::max(r, peak));
    }
    }
    return 1.0;
}

namespace detail {

inline GrayImage csf_filter(const GrayImage& img, ContrastSensitivity kind) {
    const int rows = img.height();
    const int cols = img.width();
    Fft2d fft(rows, cols);
    auto spec = fft.forward(img);
    for (int r = 0; r < rows; ++r) {
        const double v = signed_frequency(r, rows) / 15.0;
        for (int c = 0; c < cols; ++c) {
            const double u = signed_frequency(c, cols) / 15.0;
            spec[static_cast<std::size_t>(r) * cols + c] *= contrast_sensitivity(std::sqrt(u * u + v * v), kind);
        }
    }
    fft.inverse(spec);
    GrayImage out(img.size());
    for (std::size_t i = 0; i < out.pixel_count(); ++i) out.data()[i] = spec[i].real();
    return out;
}

inline GrayImage masked_contrast(const GrayImage& filtered, const QcbParams& p) {
    const GrayImage fine = convolve_separable(filtered, gaussian_kernel(p.sigma_k));
    const GrayImage coarse = convolve_separable(filtered, gaussian_kernel(2.0 * p.sigma_k));
    GrayImage out(filtered.size());
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        const double den = coarse.data()[i];
        double c = std::abs(den) > 1e-12 ? std::abs(fine.data()[i] / den - 1.0) : 0.0;
        if (c < 1e-9) c = 0.0; // FFT roundoff on flat input

        out.data()[i] = p.t * std::pow(c, p.p) / (p.h * std::pow(c, p.q) + p.Z);
    }
    return out;
}

// Preservation ratio; two zero contrasts count as perfectly preserved.
inline double preservation(double x, double f) {
    if (x == f) return 1.0;
    return x < f ? x / f : f / x;
}

} // namespace detail

inline double q_cb(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QcbParams& p = {}) {
    p.validate();
    require_same_size(a, f, "Q_CB inputs differ in size");
    require_same_size(b, f, "Q_CB inputs differ in size");
    const GrayImage ca = detail::masked_contrast(detail::csf_filter(a, p.csf), p);
    const GrayImage cb = detail::masked_contrast(detail::csf_filter(b, p.csf), p);
    const GrayImage cf = detail::masked_contrast(detail::csf_filter(f, p.csf), p);
    double total = 0.0;
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
        const double a2 = ca.data()[i] * ca.data()[i];
        const double b2 = cb.data()[i] * cb.data()[i];
        const double la = (a2 + b2) > 0.0 ? a2 / (a2 + b2) : 0.5;
        total += la * detail::preservation(ca.data()[i], cf.data()[i]) +
                 (1.0 - la) * detail::preservation(cb.data()[i], cf.data()[i]);
    }
    return total / static_cast<double>(f.pixel_count());
}

} // namespace depthfuse
