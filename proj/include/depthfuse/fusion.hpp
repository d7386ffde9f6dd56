#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "depthfuse/dofseg.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/parallel.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

/// Multi-focus source images sharing one geometry, ordered by focus setting.
class ImageStack {
public:
    explicit ImageStack(std::vector<ColorImage> sources) : sources_(std::move(sources)) {
        if (sources_.size() < 2) throw Error(Errc::stack_size, "an image stack needs at least two sources");
        if (sources_.size() > 256) throw Error(Errc::stack_size, "at most 256 sources are supported");
        for (const auto& s : sources_) require_same_size(s, sources_.front(), "stack sources differ in size");
    }

    std::size_t size() const { return sources_.size(); }
    Size image_size() const { return sources_.front().size(); }
    const ColorImage& operator[](std::size_t i) const { return sources_[i]; }
    const std::vector<ColorImage>& sources() const { return sources_; }

private:
    std::vector<ColorImage> sources_;
};

using LabelMap = Raster<std::uint8_t>; // per-pixel source index
using WeightMap = Raster<double>;      // per-pixel blend coefficient in [0, 1]

namespace detail {

inline double laplacian(const GrayImage& g, int x, int y) {
    return g.clamped(x, y - 1) + g.clamped(x, y + 1) + g.clamped(x - 1, y) + g.clamped(x + 1, y) - 4.0 * g(x, y);
}

} // namespace detail

/// Mean squared Laplacian over the interior of a mask, i.e. the mask pixels
/// whose four neighbors are also in the mask. A mask with no interior is
/// scored over all of its pixels with replicate padding.
inline double focus_measure(const GrayImage& img, const Raster<std::uint8_t>& mask) {
    require_same_size(img, mask, "focus mask and image differ in size");
    auto in = [&](int x, int y) { return mask.contains(x, y) && mask(x, y) != 0; };
    double sum = 0.0;
    std::size_t n = 0;
    bool any = false;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            if (!in(x, y)) continue;
            any = true;
            if (!(in(x - 1, y) && in(x + 1, y) && in(x, y - 1) && in(x, y + 1))) continue;
            const double l = detail::laplacian(img, x, y);
            sum += l * l;
            ++n;
        }
    if (!any) throw Error(Errc::empty_mask, "focus measure needs at least one mask pixel");
    if (n == 0) {
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (in(x, y)) {
                    const double l = detail::laplacian(img, x, y);
                    sum += l * l;
                    ++n;
                }
    }
    return sum / static_cast<double>(n);
}

/// Per-region focus scores, indexed [source][region]. Same measure as
/// focus_measure applied to every region mask, computed in one sweep.
inline std::vector<std::vector<double>> region_focus_scores(const ImageStack& stack, const SegmentationMap& seg) {
    require_same_size(seg, stack[0], "segmentation and stack differ in size");
    const int w = seg.width();
    const int h = seg.height();
    const auto regions = static_cast<std::size_t>(seg.region_count);

    // Interior pixels, and a per-region count of them.
    std::vector<std::uint8_t> interior(seg.labels.pixel_count(), 0);
    std::vector<std::size_t> interior_count(regions, 0);
    for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x) {
            const auto l = seg(x, y);
            if (seg(x - 1, y) == l && seg(x + 1, y) == l && seg(x, y - 1) == l && seg(x, y + 1) == l) {
                interior[seg.labels.index(x, y)] = 1;
                ++interior_count[static_cast<std::size_t>(l)];
            }
        }
    std::vector<std::size_t> total_count(regions, 0);
    for (auto l : seg.labels.samples()) ++total_count[static_cast<std::size_t>(l)];

    std::vector<std::vector<double>> scores(stack.size(), std::vector<double>(regions, 0.0));
    parallel_for(stack.size(), [&](std::size_t s0, std::size_t s1) {
        for (std::size_t s = s0; s < s1; ++s) {
            const GrayImage g = rgb_to_gray(stack[s]);
            auto& acc = scores[s];
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const std::size_t i = seg.labels.index(x, y);
                    const auto l = static_cast<std::size_t>(seg.labels.data()[i]);
                    if (interior[i] || interior_count[l] == 0) {
                        const double lap = detail::laplacian(g, x, y);
                        acc[l] += lap * lap;
                    }
                }
            for (std::size_t r = 0; r < regions; ++r)
                acc[r] /= static_cast<double>(interior_count[r] ? interior_count[r] : total_count[r]);
        }
    });
    return scores;
}

/// Labels every region with the sharpest source; ties go to the lower index.
inline LabelMap select_in_focus(const ImageStack& stack, const SegmentationMap& seg) {
    const auto scores = region_focus_scores(stack, seg);
    std::vector<std::uint8_t> choice(static_cast<std::size_t>(seg.region_count), 0);
    for (std::size_t r = 0; r < choice.size(); ++r) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < stack.size(); ++s)
            if (scores[s][r] > scores[best][r]) best = s;
        choice[r] = static_cast<std::uint8_t>(best);
    }
    LabelMap labels(seg.size());
    for (std::size_t i = 0; i < labels.pixel_count(); ++i)
        labels.data()[i] = choice[static_cast<std::size_t>(seg.labels.data()[i])];
    return labels;
}

/// Binary weight map for a two-source stack: 1 where `source_index` was chosen.
inline WeightMap weight_map(const LabelMap& labels, std::size_t source_index, std::size_t stack_size = 2) {
    if (stack_size != 2) throw Error(Errc::stack_size, "weight maps are defined for two-source stacks");
    if (source_index >= stack_size) throw Error(Errc::invalid_argument, "source index out of range");
    WeightMap w(labels.size());
    for (std::size_t i = 0; i < w.pixel_count(); ++i) w.data()[i] = labels.data()[i] == source_index ? 1.0 : 0.0;
    return w;
}

/// F = (1 - W) A + W B per channel, rounded to the nearest integer.
inline ColorImage fuse_weighted(const ColorImage& a, const ColorImage& b, const WeightMap& w) {
    require_same_size(a, b, "fusion sources differ in size");
    require_same_size(a, w, "weight map and sources differ in size");
    ColorImage out(a.size());
    parallel_for(a.pixel_count(), [&](std::size_t p0, std::size_t p1) {
        for (std::size_t p = p0; p < p1; ++p) {
            const double wt = w.data()[p];
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = (1.0 - wt) * a.data()[3 * p + c] + wt * b.data()[3 * p + c];
                out.data()[3 * p + c] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
        }
    });
    return out;
}

/// Composes the all-in-focus image. Two sources go through the weight-map
/// blend; larger stacks copy each pixel from its labelled source, which is
/// what the blend reduces to for binary weights.
inline ColorImage fuse(const ImageStack& stack, const LabelMap& labels) {
    require_same_size(labels, stack[0], "label map and stack differ in size");
    for (auto l : labels.samples())
        if (l >= stack.size()) throw Error(Errc::invalid_argument, "label refers to a missing source");
    if (stack.size() == 2) return fuse_weighted(stack[0], stack[1], weight_map(labels, 1));
    ColorImage out(stack.image_size());
    parallel_for(out.pixel_count(), [&](std::size_t p0, std::size_t p1) {
        for (std::size_t p = p0; p < p1; ++p) {
            const auto* src = stack[labels.data()[p]].data() + 3 * p;
            std::copy(src, src + 3, out.data() + 3 * p);
        }
    });
    return out;
}

inline Gray8Image weight_to_gray(const WeightMap& w) {
    Gray8Image out(w.size());
    for (std::size_t i = 0; i < w.pixel_count(); ++i)
        out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::round(w.data()[i] * 255.0), 0.0, 255.0));
    return out;
}

} // namespace depthfuse
