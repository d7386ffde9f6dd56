#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "depthfuse/error.hpp"
#include "depthfuse/parallel.hpp"

namespace depthfuse {

struct Size {
    int width = 0;
    int height = 0;

    std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    friend bool operator==(const Size&, const Size&) = default;
};

namespace detail {
inline void check_size(Size s, const char* what) {
    if (s.width <= 0 || s.height <= 0)
        throw Error(Errc::invalid_argument, std::string(what) + " dimensions must be positive");
    constexpr auto limit = static_cast<std::size_t>(std::numeric_limits<int>::max()) / 4;
    if (s.area() > limit) throw Error(Errc::dimension_overflow, std::string(what) + " is too large");
}
} // namespace detail

/// Row-major single-plane raster. The three raster kinds in the toolkit are
/// thin aliases of this with different sample types.
template <typename T, int Channels = 1>
class Raster {
public:
    using value_type = T;
    static constexpr int channels = Channels;

    Raster() = default;

    Raster(Size size, T fill = T{}) : size_(size) {
        detail::check_size(size, "raster");
        data_.assign(size.area() * Channels, fill);
    }

    Raster(Size size, std::vector<T> samples) : size_(size), data_(std::move(samples)) {
        detail::check_size(size, "raster");
        if (data_.size() != size.area() * Channels)
            throw Error(Errc::dimension_mismatch, "sample count does not match raster dimensions");
    }

    Size size() const { return size_; }
    int width() const { return size_.width; }
    int height() const { return size_.height; }
    std::size_t pixel_count() const { return size_.area(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int x, int y, int c = 0) { return data_[index(x, y) * Channels + c]; }
    const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y) * Channels + c]; }

    // Pixel access with coordinates clamped to the raster (replicate padding).
    const T& clamped(int x, int y, int c = 0) const {
        x = x < 0 ? 0 : (x >= size_.width ? size_.width - 1 : x);
        y = y < 0 ? 0 : (y >= size_.height ? size_.height - 1 : y);
        return (*this)(x, y, c);
    }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < size_.width && y < size_.height; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(x);
    }

    std::span<T> samples() & { return data_; }
    std::span<const T> samples() const& { return data_; }
    std::span<const T> samples() && = delete; // would dangle
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    Size size_{};
    std::vector<T> data_;
};

using ColorImage = Raster<std::uint8_t, 3>;
using GrayImage = Raster<double, 1>;
using Gray8Image = Raster<std::uint8_t, 1>;

/// Depth in millimeters; 0 marks an invalid pixel.
using DepthMap = Raster<std::uint16_t, 1>;

inline constexpr std::uint16_t kInvalidDepth = 0;

struct DepthRange {
    std::uint16_t min_mm = 500;
    std::uint16_t max_mm = 5000;

    bool contains(std::uint16_t z) const { return z >= min_mm && z <= max_mm; }
};

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
    if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, what);
}

inline std::size_t count_invalid(const DepthMap& d) {
    std::size_t n = 0;
    for (auto z : d.samples()) n += (z == kInvalidDepth);
    return n;
}

// BT.601 luma.
inline GrayImage rgb_to_gray(const ColorImage& img) {
    GrayImage out(img.size());
    const std::uint8_t* src = img.data();
    double* dst = out.data();
    parallel_for(img.pixel_count(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::uint8_t* p = src + 3 * i;
            dst[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        }
    });
    return out;
}

inline Gray8Image quantize(const GrayImage& g) {
    Gray8Image out(g.size());
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
        double v = std::round(g.data()[i]);
        out.data()[i] = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
    return out;
}

inline GrayImage to_gray(const Gray8Image& g) {
    GrayImage out(g.size());
    for (std::size_t i = 0; i < g.pixel_count(); ++i) out.data()[i] = g.data()[i];
    return out;
}

inline GrayImage mirror_horizontal(const GrayImage& g) {
    GrayImage out(g.size());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) out(x, y) = g(g.width() - 1 - x, y);
    return out;
}

} // namespace depthfuse
