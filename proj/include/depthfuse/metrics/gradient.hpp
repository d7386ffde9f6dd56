#pragma once

// Xydeas-Petrovic edge preservation metric.

#include <cmath>
#include <numbers>

#include "depthfuse/error.hpp"
#include "depthfuse/filters.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

struct QgParams {
    double gamma_g = 0.9994;
    double k_g = -15.0;
    double sigma_g = 0.5;
    double gamma_a = 0.9879;
    double k_a = -22.0;
    double sigma_a = 0.8;
    double L = 1.0; // weight exponent, w = g^L
    // Evaluate the orientation sigmoid on the relative strength instead of
    // the orientation preservation value (literal transcription variant).
    bool orientation_sigmoid_on_strength = false;

    void validate() const {
        if (!(gamma_g > 0.0 && gamma_g <= 1.0) || !(gamma_a > 0.0 && gamma_a <= 1.0))
            throw Error(Errc::invalid_argument, "sigmoid gains must lie in (0, 1]");
    }

    /// Q^AF for perfect preservation (G = 1, Delta = 1).
    double perfect_preservation() const {
        return gamma_g / (1.0 + std::exp(k_g * (1.0 - sigma_g))) * gamma_a / (1.0 + std::exp(k_a * (1.0 - sigma_a)));
    }
};

namespace detail {

struct EdgeField {
    GrayImage strength;
    GrayImage orientation; // atan(Sx/Sy) folded into (-pi/2, pi/2]
};

inline EdgeField edge_field(const GrayImage& g) {
    const auto s = sobel(g);
    EdgeField e{GrayImage(g.size()), GrayImage(g.size())};
    constexpr double half_pi = std::numbers::pi / 2.0;
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
        const double sx = s.gx.data()[i];
        const double sy = s.gy.data()[i];
        e.strength.data()[i] = std::sqrt(sx * sx + sy * sy);
        double a = std::atan2(sx, sy);
        if (a > half_pi) a -= std::numbers::pi;
        if (a <= -half_pi) a += std::numbers::pi;
        e.orientation.data()[i] = a;
    }
    return e;
}

// Per-pixel Q^XF (edge strength x orientation preservation).
inline double edge_preservation(double gx, double ax, double gf, double af, const QgParams& p) {
    double G = 1.0;
    double D = 1.0;
    if (gx != 0.0 || gf != 0.0) {
        G = gx > gf ? gf / gx : gx / gf;
        // Orientations are lines, so compare them modulo pi.
        double d = std::abs(ax - af);
        if (d > std::numbers::pi / 2.0) d = std::numbers::pi - d;
        D = 1.0 - d / (std::numbers::pi / 2.0);
    }
    const double qg = p.gamma_g / (1.0 + std::exp(p.k_g * (G - p.sigma_g)));
    const double arg = p.orientation_sigmoid_on_strength ? G : D;
    const double qa = p.gamma_a / (1.0 + std::exp(p.k_a * (arg - p.sigma_a)));
    return qg * qa;
}

} // namespace detail

/// Weighted mean of edge preservation from each source into F, weights g^L.
inline double q_g(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QgParams& p = {}) {
    p.validate();
    require_same_size(a, f, "Q_G inputs differ in size");
    require_same_size(b, f, "Q_G inputs differ in size");
    const auto ea = detail::edge_field(a);
    const auto eb = detail::edge_field(b);
    const auto ef = detail::edge_field(f);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
        const double wa = std::pow(ea.strength.data()[i], p.L);
        const double wb = std::pow(eb.strength.data()[i], p.L);
        const double gf = ef.strength.data()[i];
        const double of = ef.orientation.data()[i];
        num += wa * detail::edge_preservation(ea.strength.data()[i], ea.orientation.data()[i], gf, of, p);
        num += wb * detail::edge_preservation(eb.strength.data()[i], eb.orientation.data()[i], gf, of, p);
        den += wa + wb;
    }
    if (!(den > 0.0)) throw Error(Errc::degenerate_input, "Q_G is undefined when both sources are constant");
    return num / den;
}

} // namespace depthfuse
