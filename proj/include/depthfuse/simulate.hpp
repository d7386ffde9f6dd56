#pragma once

// Synthetic multi-focus scenes: fronto-parallel textured layers imaged
// through a thin lens, with a sensor-style degraded depth map. Every
// pipeline stage can be checked against the known ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthfuse/calibration.hpp"
#include "depthfuse/depthprep.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/filters.hpp"
#include "depthfuse/fusion.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(int px, int py) const { return px >= x && py >= y && px < x + width && py < y + height; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct SceneLayer {
    double depth_mm = 0.0;
    std::optional<Rect> region; // empty: the layer covers the whole frame
    std::uint32_t texture_seed = 0;
};

struct Degradation {
    int hole_band_px = 0;
    Extrinsics extrinsic_shift; // IR -> color transform the aligner must undo
    int depth_noise_mm = 0;
    std::uint32_t noise_seed = 0;
};

struct SceneSpec {
    Size image_size{640, 480};
    OpticsConfig optics;
    CameraIntrinsics intrinsics; // shared by the simulated IR and color cameras
    std::vector<double> focus_depths;
    std::vector<SceneLayer> layers;
    Degradation degradation;
    DepthRange range;

    void validate() const {
        detail::check_size(image_size, "scene");
        optics.validate();
        intrinsics.validate();
        degradation.extrinsic_shift.validate();
        if (layers.empty()) throw Error(Errc::invalid_argument, "a scene needs at least one layer");
        if (focus_depths.empty()) throw Error(Errc::invalid_argument, "a scene needs at least one focus depth");
        for (const auto& l : layers) {
            if (!(l.depth_mm > 0.0)) throw Error(Errc::invalid_argument, "layer depths must be positive");
            const auto z = std::lround(l.depth_mm);
            if (z < range.min_mm || z > range.max_mm) throw Error(Errc::invalid_argument, "layer depth outside sensor range");
            if (l.depth_mm <= optics.focal_length_mm) throw Error(Errc::invalid_depth, "layer depth within focal length");
        }
        for (double u : focus_depths)
            if (!(u > optics.focal_length_mm)) throw Error(Errc::invalid_depth, "focus depth must exceed the focal length");
        if (degradation.hole_band_px < 0 || degradation.depth_noise_mm < 0)
            throw Error(Errc::invalid_argument, "degradation amounts must be non-negative");
    }

    Calibration calibration() const {
        return Calibration{intrinsics, intrinsics, degradation.extrinsic_shift, optics};
    }
};

/// Blur-circle diameter on the sensor (mm) for a point at u when the lens
/// is focused at u_f (exact thin-lens form).
inline double coc_diameter(double u, double u_f, const OpticsConfig& o) {
    const double f = o.focal_length_mm;
    if (!(u > f) || !(u_f > f)) throw Error(Errc::invalid_depth, "depth must exceed the focal length");
    return (f * f / o.f_number) * std::abs(u - u_f) / (u * (u_f - f));
}

/// Gaussian PSF scale approximating the defocus disc, in pixels.
inline double blur_sigma_px(double u, double u_f, const OpticsConfig& o) {
    return coc_diameter(u, u_f, o) / (2.0 * o.pixel_pitch_mm);
}

/// Deterministic fine-grained color texture.
inline ColorImage layer_texture(Size size, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> base(70, 185);
    const int r0 = base(rng), g0 = base(rng), b0 = base(rng);
    std::uniform_int_distribution<int> fine(-45, 45);
    std::uniform_int_distribution<int> tint(-8, 8);
    ColorImage tex(size);
    for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x) {
            const int l = fine(rng);
            tex(x, y, 0) = static_cast<std::uint8_t>(std::clamp(r0 + l + tint(rng), 0, 255));
            tex(x, y, 1) = static_cast<std::uint8_t>(std::clamp(g0 + l + tint(rng), 0, 255));
            tex(x, y, 2) = static_cast<std::uint8_t>(std::clamp(b0 + l + tint(rng), 0, 255));
        }
    return tex;
}

struct RenderedScene {
    std::vector<ColorImage> sources; // one per focus depth, same order
    ColorImage ground_truth;
    DepthMap true_depth;
    std::vector<std::size_t> layer_focus_index; // sharpest source per layer
};

namespace detail {

// Layer indices ordered far to near; ties keep spec order.
inline std::vector<std::size_t> back_to_front(const SceneSpec& spec) {
    std::vector<std::size_t> order(spec.layers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spec.layers[a].depth_mm > spec.layers[b].depth_mm; });
    return order;
}

inline Raster<double> layer_alpha(const SceneSpec& spec, const SceneLayer& l) {
    Raster<double> a(spec.image_size, l.region ? 0.0 : 1.0);
    if (l.region)
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x)
                if (l.region->contains(x, y)) a(x, y) = 1.0;
    return a;
}

} // namespace detail

inline RenderedScene render_stack(const SceneSpec& spec) {
    spec.validate();
    const auto order = detail::back_to_front(spec);
    std::vector<ColorImage> textures;
    std::vector<Raster<double>> alphas;
    for (const auto& l : spec.layers) {
        textures.push_back(layer_texture(spec.image_size, l.texture_seed));
        alphas.push_back(detail::layer_alpha(spec, l));
    }

    auto composite = [&](auto sigma_of) {
        Raster<double, 3> acc(spec.image_size, 0.0);
        for (std::size_t li : order) {
            const double sigma = sigma_of(spec.layers[li]);
            const auto tex = convolve_separable(textures[li], gaussian_kernel(sigma));
            const auto alpha = convolve_separable(alphas[li], gaussian_kernel(sigma));
            for (std::size_t p = 0; p < acc.pixel_count(); ++p) {
                const double a = alpha.data()[p];
                for (std::size_t c = 0; c < 3; ++c)
                    acc.data()[3 * p + c] = acc.data()[3 * p + c] * (1.0 - a) + tex.data()[3 * p + c] * a;
            }
        }
        ColorImage out(spec.image_size);
        for (std::size_t i = 0; i < acc.samples().size(); ++i)
            out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::round(acc.data()[i]), 0.0, 255.0));
        return out;
    };

    RenderedScene out;
    for (double uf : spec.focus_depths)
        out.sources.push_back(composite([&](const SceneLayer& l) { return blur_sigma_px(l.depth_mm, uf, spec.optics); }));
    out.ground_truth = composite([](const SceneLayer&) { return 0.0; });

    out.true_depth = DepthMap(spec.image_size, kInvalidDepth);
    for (std::size_t li : order) {
        const auto z = static_cast<std::uint16_t>(std::lround(spec.layers[li].depth_mm));
        for (std::size_t p = 0; p < out.true_depth.pixel_count(); ++p)
            if (alphas[li].data()[p] > 0.5) out.true_depth.data()[p] = z;
    }

    for (const auto& l : spec.layers) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < spec.focus_depths.size(); ++s)
            if (coc_diameter(l.depth_mm, spec.focus_depths[s], spec.optics) <
                coc_diameter(l.depth_mm, spec.focus_depths[best], spec.optics))
                best = s;
        out.layer_focus_index.push_back(best);
    }
    return out;
}

/// Imitates a structured-light sensor: zeroes `hole_band_px` columns just
/// left of every horizontal depth jump above 100 mm, moves the map into the
/// sensor frame with the inverse extrinsics, then adds uniform jitter.
inline DepthMap degrade_depth(const DepthMap& true_depth, const Degradation& deg, const CameraIntrinsics& k) {
    constexpr int kJump = 100;
    DepthMap d = true_depth;
    if (deg.hole_band_px > 0) {
        for (int y = 0; y < d.height(); ++y)
            for (int x = 0; x + 1 < d.width(); ++x) {
                if (std::abs(static_cast<int>(true_depth(x + 1, y)) - true_depth(x, y)) <= kJump) continue;
                for (int b = 0; b < deg.hole_band_px && x - b >= 0; ++b) d(x - b, y) = kInvalidDepth;
            }
    }
    if (!deg.extrinsic_shift.is_identity()) d = align_depth(d, k, k, deg.extrinsic_shift.inverse(), d.size());
    if (deg.depth_noise_mm > 0) {
        std::mt19937 rng(deg.noise_seed);
        std::uniform_int_distribution<int> jitter(-deg.depth_noise_mm, deg.depth_noise_mm);
        for (auto& z : d.samples()) {
            if (z == kInvalidDepth) continue;
            z = static_cast<std::uint16_t>(std::clamp(static_cast<int>(z) + jitter(rng), 1, 65535));
        }
    }
    return d;
}

/// 1 for pixels farther than `radius` (Chebyshev) from a depth change in
/// `true_depth`, 0 inside that band.
inline Raster<std::uint8_t> interior_mask(const DepthMap& true_depth, int radius) {
    if (radius < 0) throw Error(Errc::invalid_argument, "band radius must be non-negative");
    const int w = true_depth.width(), h = true_depth.height();
    Raster<std::uint8_t> mask(true_depth.size(), 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool edge = (x + 1 < w && true_depth(x + 1, y) != true_depth(x, y)) ||
                              (y + 1 < h && true_depth(x, y + 1) != true_depth(x, y));
            if (!edge) continue;
            for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + 1 + radius); ++yy)
                for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + 1 + radius); ++xx) mask(xx, yy) = 0;
        }
    return mask;
}

/// Two layers (textured background plus a nearer rectangle) focused
/// exactly at each layer's depth, with Kinect-like degradation.
inline SceneSpec random_two_layer_scene(std::uint32_t seed, Size size = {640, 480}) {
    std::mt19937 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    SceneSpec s;
    s.image_size = size;
    s.intrinsics = CameraIntrinsics{s.optics.focal_length_mm / s.optics.pixel_pitch_mm,
                                    s.optics.focal_length_mm / s.optics.pixel_pitch_mm, size.width / 2.0,
                                    size.height / 2.0};
    const double back = std::round(uniform(1800.0, 3000.0));
    const double front = std::round(uniform(700.0, 1100.0));
    const int rw = uniform_int(size.width / 4, size.width / 2);
    const int rh = uniform_int(size.height / 4, size.height / 2);
    const Rect rect{uniform_int(size.width / 8, size.width - rw - size.width / 8),
                    uniform_int(size.height / 8, size.height - rh - size.height / 8), rw, rh};
    s.layers = {SceneLayer{back, std::nullopt, seed * 2654435761u + 1u},
                SceneLayer{front, rect, seed * 2654435761u + 2u}};
    s.focus_depths = {front, back};
    s.degradation.hole_band_px = 3;
    s.degradation.extrinsic_shift = Extrinsics::translation(25.0, 0.0, 0.0);
    s.degradation.depth_noise_mm = 3;
    s.degradation.noise_seed = seed;
    return s;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const Rect& r) { j = {r.x, r.y, r.width, r.height}; }
inline void from_json(const nlohmann::json& j, Rect& r) {
    if (!j.is_array() || j.size() != 4) throw Error(Errc::invalid_argument, "rect must be [x, y, width, height]");
    r = Rect{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline void to_json(nlohmann::json& j, const SceneSpec& s) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : s.layers)
        layers.push_back({{"depth", l.depth_mm},
                          {"region", l.region ? nlohmann::json(*l.region) : nlohmann::json()},
                          {"texture_seed", l.texture_seed}});
    j = {{"width", s.image_size.width},
         {"height", s.image_size.height},
         {"optics", s.optics},
         {"intrinsics", s.intrinsics},
         {"focus_depths", s.focus_depths},
         {"layers", layers},
         {"degradation",
          {{"hole_band_px", s.degradation.hole_band_px},
           {"extrinsic_shift", s.degradation.extrinsic_shift},
           {"depth_noise_mm", s.degradation.depth_noise_mm},
           {"noise_seed", s.degradation.noise_seed}}},
         {"range", {s.range.min_mm, s.range.max_mm}}};
}

inline void from_json(const nlohmann::json& j, SceneSpec& s) {
    s = SceneSpec{};
    s.image_size = Size{j.value("width", 640), j.value("height", 480)};
    if (j.contains("optics")) s.optics = j.at("optics").get<OpticsConfig>();
    if (j.contains("intrinsics")) {
        s.intrinsics = j.at("intrinsics").get<CameraIntrinsics>();
    } else {
        const double fpx = s.optics.focal_length_mm / s.optics.pixel_pitch_mm;
        s.intrinsics = CameraIntrinsics{fpx, fpx, s.image_size.width / 2.0, s.image_size.height / 2.0};
    }
    s.focus_depths = j.at("focus_depths").get<std::vector<double>>();
    for (const auto& l : j.at("layers")) {
        SceneLayer layer;
        layer.depth_mm = l.at("depth").get<double>();
        if (l.contains("region") && !l.at("region").is_null()) layer.region = l.at("region").get<Rect>();
        layer.texture_seed = l.value("texture_seed", 0u);
        s.layers.push_back(layer);
    }
    if (j.contains("degradation")) {
        const auto& d = j.at("degradation");
        s.degradation.hole_band_px = d.value("hole_band_px", 0);
        if (d.contains("extrinsic_shift")) s.degradation.extrinsic_shift = d.at("extrinsic_shift").get<Extrinsics>();
        s.degradation.depth_noise_mm = d.value("depth_noise_mm", 0);
        s.degradation.noise_seed = d.value("noise_seed", 0u);
    }
    if (j.contains("range")) {
        const auto r = j.at("range").get<std::vector<int>>();
        if (r.size() != 2) throw Error(Errc::invalid_argument, "range must be [min_mm, max_mm]");
        s.range = DepthRange{static_cast<std::uint16_t>(r[0]), static_cast<std::uint16_t>(r[1])};
    }
}

inline SceneSpec load_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::open_failed, path.string());
    SceneSpec s;
    try {
        s = nlohmann::json::parse(in).get<SceneSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, path.string() + ": " + e.what());
    }
    s.validate();
    return s;
}

} // namespace depthfuse
