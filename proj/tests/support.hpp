#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "depthfuse/raster.hpp"

namespace depthfuse::test {

inline GrayImage random_gray(Size s, std::uint32_t seed, int lo = 0, int hi = 255) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(lo, hi);
    GrayImage g(s);
    for (auto& v : g.samples()) v = dist(rng);
    return g;
}

inline ColorImage random_color(Size s, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    ColorImage img(s);
    for (auto& v : img.samples()) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

// Smooth structure plus fine texture, the kind of content the metrics expect.
inline GrayImage textured_gray(Size s, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    std::uniform_int_distribution<int> fine(-30, 30);
    const double p1 = phase(rng), p2 = phase(rng);
    GrayImage g(s);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            const double v = 128.0 + 50.0 * std::sin(0.11 * x + p1) * std::cos(0.07 * y + p2) + fine(rng);
            g(x, y) = std::round(std::clamp(v, 0.0, 255.0));
        }
    return g;
}

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = std::filesystem::temp_directory_path() /
                ("depthfuse_" + std::string(info->test_suite_name()) + "_" + info->name());
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace depthfuse::test
