#pragma once

// Phase congruency (Kovesi's log-Gabor formulation) and the Zhao et al.
// fusion metric built on its map and principal moments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "depthfuse/detail/fft.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

struct PhaseCongruencyParams {
    int scales = 4;
    int orientations = 6;
    double min_wavelength = 3.0;
    double mult = 2.1;
    double sigma_on_f = 0.55;
    double noise_k = 2.0;  // noise threshold in standard deviations
    double cut_off = 0.5;  // frequency spread below which PC is penalized
    double g = 10.0;       // sharpness of that penalty
};

struct PhaseCongruency {
    GrayImage pc;         // overall phase congruency
    GrayImage max_moment; // M
    GrayImage min_moment; // m
};

inline constexpr int kPhaseCongruencyMinSize = 32;

inline PhaseCongruency phase_congruency(const GrayImage& img, const PhaseCongruencyParams& p = {}) {
    if (img.width() < kPhaseCongruencyMinSize || img.height() < kPhaseCongruencyMinSize)
        throw Error(Errc::image_too_small, "phase congruency needs at least 32x32 pixels");
    constexpr double eps = 1e-4;
    const int rows = img.height();
    const int cols = img.width();
    const std::size_t n = img.pixel_count();

    detail::Fft2d fft(rows, cols);
    const auto spectrum = fft.forward(img);

    // Frequency-plane polar coordinates, unshifted layout. Nyquist bins of
    // even dimensions are excluded from every filter so the bank treats
    // u and -u identically.
    std::vector<double> radius(n), sin_t(n), cos_t(n);
    std::vector<std::uint8_t> nyquist(n, 0);
    for (int r = 0; r < rows; ++r) {
        const int ky = detail::signed_frequency(r, rows);
        const double fy = static_cast<double>(ky) / rows;
        for (int c = 0; c < cols; ++c) {
            const int kx = detail::signed_frequency(c, cols);
            const double fx = static_cast<double>(kx) / cols;
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            radius[i] = std::sqrt(fx * fx + fy * fy);
            const double theta = std::atan2(-fy, fx);
            sin_t[i] = std::sin(theta);
            cos_t[i] = std::cos(theta);
            nyquist[i] = (cols % 2 == 0 && kx == -cols / 2) || (rows % 2 == 0 && ky == -rows / 2);
        }
    }
    radius[0] = 1.0;

    std::vector<std::vector<double>> log_gabor(static_cast<std::size_t>(p.scales), std::vector<double>(n));
    for (int s = 0; s < p.scales; ++s) {
        const double fo = 1.0 / (p.min_wavelength * std::pow(p.mult, s));
        const double denom = 2.0 * std::log(p.sigma_on_f) * std::log(p.sigma_on_f);
        auto& lg = log_gabor[static_cast<std::size_t>(s)];
        for (std::size_t i = 0; i < n; ++i) {
            const double lowpass = 1.0 / (1.0 + std::pow(radius[i] / 0.45, 30.0));
            const double l = std::log(radius[i] / fo);
            lg[i] = nyquist[i] ? 0.0 : std::exp(-l * l / denom) * lowpass;
        }
        lg[0] = 0.0;
    }

    std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
    std::vector<double> covx2(n, 0.0), covy2(n, 0.0), covxy(n, 0.0);
    std::vector<double> sum_e(n), sum_o(n), sum_an(n), max_an(n), energy(n), spread(n);
    std::vector<std::vector<std::complex<double>>> eo(static_cast<std::size_t>(p.scales));

    for (int o = 0; o < p.orientations; ++o) {
        const double angle = o * std::numbers::pi / p.orientations;
        const double ca = std::cos(angle);
        const double sa = std::sin(angle);
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = sin_t[i] * ca - cos_t[i] * sa;
            const double dc = cos_t[i] * ca + sin_t[i] * sa;
            const double dtheta = std::min(std::abs(std::atan2(ds, dc)) * p.orientations / 2.0, std::numbers::pi);
            spread[i] = (std::cos(dtheta) + 1.0) / 2.0;
        }
        std::fill(sum_e.begin(), sum_e.end(), 0.0);
        std::fill(sum_o.begin(), sum_o.end(), 0.0);
        std::fill(sum_an.begin(), sum_an.end(), 0.0);
        std::fill(energy.begin(), energy.end(), 0.0);
        double tau = 0.0;
        for (int s = 0; s < p.scales; ++s) {
            auto& resp = eo[static_cast<std::size_t>(s)];
            resp.assign(spectrum.begin(), spectrum.end());
            const auto& lg = log_gabor[static_cast<std::size_t>(s)];
            for (std::size_t i = 0; i < n; ++i) resp[i] *= lg[i] * spread[i];
            fft.inverse(resp);
            for (std::size_t i = 0; i < n; ++i) {
                const double an = std::abs(resp[i]);
                sum_an[i] += an;
                sum_e[i] += resp[i].real();
                sum_o[i] += resp[i].imag();
                max_an[i] = s == 0 ? an : std::max(max_an[i], an);
            }
            if (s == 0) {
                // Noise scale from the median response of the finest filter.
                std::vector<double> tmp(sum_an);
                auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
                std::nth_element(tmp.begin(), mid, tmp.end());
                double median = *mid;
                if (tmp.size() % 2 == 0) median = 0.5 * (median + *std::max_element(tmp.begin(), mid));
                tau = median / std::sqrt(std::log(4.0));
            }
        }
        for (int s = 0; s < p.scales; ++s) {
            const auto& resp = eo[static_cast<std::size_t>(s)];
            for (std::size_t i = 0; i < n; ++i) {
                const double xe = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + eps;
                const double me = sum_e[i] / xe;
                const double mo = sum_o[i] / xe;
                const double e = resp[i].real();
                const double od = resp[i].imag();
                energy[i] += e * me + od * mo - std::abs(e * mo - od * me);
            }
        }
        const double total_tau = tau * (1.0 - std::pow(1.0 / p.mult, p.scales)) / (1.0 - 1.0 / p.mult);
        const double noise_mean = total_tau * std::sqrt(std::numbers::pi / 2.0);
        const double noise_sigma = total_tau * std::sqrt((4.0 - std::numbers::pi) / 2.0);
        const double threshold = noise_mean + p.noise_k * noise_sigma;
        for (std::size_t i = 0; i < n; ++i) {
            const double en = std::max(energy[i] - threshold, 0.0);
            const double width = (sum_an[i] / (max_an[i] + eps) - 1.0) / (p.scales - 1);
            const double weight = 1.0 / (1.0 + std::exp((p.cut_off - width) * p.g));
            const double pc = weight * en / (sum_an[i] + eps);
            energy_all[i] += weight * en;
            an_all[i] += sum_an[i];
            const double cx = pc * ca;
            const double cy = pc * sa;
            covx2[i] += cx * cx;
            covy2[i] += cy * cy;
            covxy[i] += cx * cy;
        }
    }

    PhaseCongruency out{GrayImage(img.size()), GrayImage(img.size()), GrayImage(img.size())};
    const double half = p.orientations / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x2 = covx2[i] / half;
        const double y2 = covy2[i] / half;
        const double xy = covxy[i] * 4.0 / p.orientations;
        const double denom = std::sqrt(xy * xy + (x2 - y2) * (x2 - y2)) + eps;
        out.max_moment.data()[i] = (y2 + x2 + denom) / 2.0;
        out.min_moment.data()[i] = (y2 + x2 - denom) / 2.0;
        out.pc.data()[i] = energy_all[i] / (an_all[i] + eps);
    }
    return out;
}

struct QpParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double stabilizer = 1e-4;
    PhaseCongruencyParams pc;
};

/// (sigma_xy + C) / (sigma_x sigma_y + C) with N-1 normalization.
inline double stabilized_correlation(const GrayImage& x, const GrayImage& y, double c) {
    const std::size_t n = x.pixel_count();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x.data()[i];
        my += y.data()[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x.data()[i] - mx;
        const double dy = y.data()[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double norm = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
    return (sxy * norm + c) / (std::sqrt(sxx * norm) * std::sqrt(syy * norm) + c);
}

inline double q_p(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QpParams& p = {}) {
    require_same_size(a, f, "Q_P inputs differ in size");
    require_same_size(b, f, "Q_P inputs differ in size");
    const auto pa = phase_congruency(a, p.pc);
    const auto pb = phase_congruency(b, p.pc);
    const auto pf = phase_congruency(f, p.pc);
    auto best = [&](GrayImage PhaseCongruency::*feature) {
        const GrayImage& fa = pa.*feature;
        const GrayImage& fb = pb.*feature;
        GrayImage fs(fa.size());
        for (std::size_t i = 0; i < fs.pixel_count(); ++i) fs.data()[i] = std::max(fa.data()[i], fb.data()[i]);
        const GrayImage& ff = pf.*feature;
        return std::max({stabilized_correlation(fa, ff, p.stabilizer), stabilized_correlation(fb, ff, p.stabilizer),
                         stabilized_correlation(fs, ff, p.stabilizer)});
    };
    const double pp = best(&PhaseCongruency::pc);
    const double pM = best(&PhaseCongruency::max_moment);
    const double pm = best(&PhaseCongruency::min_moment);
    return std::pow(pp, p.alpha) * std::pow(pM, p.beta) * std::pow(pm, p.gamma);
}

} // namespace depthfuse
