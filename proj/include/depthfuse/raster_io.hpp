#pragma once

// PGM (P5) and PNG readers/writers for the three raster kinds.
//
//   color images  PNG, 8-bit RGB
//   gray images   PGM P5, maxval 255
//   depth maps    PGM P5, maxval 65535, big-endian samples in millimeters

#include <png.h>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "depthfuse/error.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

using AnyRaster = std::variant<ColorImage, Gray8Image, DepthMap>;

namespace detail {

inline std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::open_failed, path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& header, const unsigned char* payload,
                 std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::write_failed, path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(n));
    if (!out) throw Error(Errc::write_failed, path.string());
}

struct PgmHeader {
    long long width = 0;
    long long height = 0;
    long long maxval = 0;
    std::size_t payload_offset = 0;
};

// Netpbm header: magic, then three whitespace-separated decimal fields with
// '#' comments allowed between tokens, then exactly one whitespace byte.
inline PgmHeader parse_pgm_header(const std::vector<unsigned char>& buf) {
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') throw Error(Errc::malformed_header, "missing P5 magic");
    std::size_t pos = 2;
    auto skip_space = [&] {
        while (pos < buf.size()) {
            if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (std::isspace(buf[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_field = [&](const char* name) {
        skip_space();
        if (pos >= buf.size() || !std::isdigit(buf[pos]))
            throw Error(Errc::malformed_header, std::string("expected ") + name);
        long long v = 0;
        while (pos < buf.size() && std::isdigit(buf[pos])) {
            v = v * 10 + (buf[pos] - '0');
            if (v > std::numeric_limits<int>::max())
                throw Error(Errc::dimension_overflow, std::string(name) + " out of range");
            ++pos;
        }
        return v;
    };
    PgmHeader h;
    h.width = read_field("width");
    h.height = read_field("height");
    h.maxval = read_field("maxval");
    if (pos >= buf.size() || !std::isspace(buf[pos]))
        throw Error(Errc::malformed_header, "missing whitespace after maxval");
    ++pos;
    if (h.width <= 0 || h.height <= 0) throw Error(Errc::malformed_header, "zero dimension");
    if (h.maxval <= 0 || h.maxval > 65535) throw Error(Errc::malformed_header, "maxval out of range");
    if (static_cast<unsigned long long>(h.width) * static_cast<unsigned long long>(h.height) >
        static_cast<unsigned long long>(std::numeric_limits<int>::max()) / 4)
        throw Error(Errc::dimension_overflow, "image too large");
    h.payload_offset = pos;
    return h;
}

inline AnyRaster read_pgm(const std::filesystem::path& path) {
    const auto buf = slurp(path);
    const PgmHeader h = parse_pgm_header(buf);
    const Size size{static_cast<int>(h.width), static_cast<int>(h.height)};
    const std::size_t bytes_per_sample = h.maxval > 255 ? 2 : 1;
    const std::size_t need = size.area() * bytes_per_sample;
    if (buf.size() - h.payload_offset < need) throw Error(Errc::truncated_payload, path.string());
    const unsigned char* p = buf.data() + h.payload_offset;
    if (bytes_per_sample == 1) {
        Gray8Image img(size);
        std::copy(p, p + need, img.data());
        return img;
    }
    DepthMap d(size);
    for (std::size_t i = 0; i < size.area(); ++i)
        d.data()[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    return d;
}

inline ColorImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        std::string msg = image.message;
        png_image_free(&image);
        if (!std::filesystem::exists(path)) throw Error(Errc::open_failed, path.string());
        throw Error(Errc::malformed_header, path.string() + ": " + msg);
    }
    image.format = PNG_FORMAT_RGB;
    if (image.width == 0 || image.height == 0 ||
        static_cast<unsigned long long>(image.width) * image.height >
            static_cast<unsigned long long>(std::numeric_limits<int>::max()) / 4) {
        png_image_free(&image);
        throw Error(Errc::dimension_overflow, path.string());
    }
    ColorImage img(Size{static_cast<int>(image.width), static_cast<int>(image.height)});
    if (!png_image_finish_read(&image, nullptr, img.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(Errc::truncated_payload, path.string() + ": " + msg);
    }
    return img;
}

inline bool has_extension(const std::filesystem::path& path, const char* ext) {
    std::string e = path.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e == ext;
}

} // namespace detail

inline AnyRaster read_raster(const std::filesystem::path& path) {
    if (detail::has_extension(path, ".png")) return detail::read_png(path);
    if (detail::has_extension(path, ".pgm")) return detail::read_pgm(path);
    throw Error(Errc::unsupported_format, path.string());
}

inline void write_raster(const std::filesystem::path& path, const ColorImage& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data(), 0, nullptr))
        throw Error(Errc::write_failed, path.string() + ": " + image.message);
}

inline void write_raster(const std::filesystem::path& path, const Gray8Image& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    detail::spit(path, header, img.data(), img.pixel_count());
}

inline void write_raster(const std::filesystem::path& path, const DepthMap& d) {
    const std::string header = "P5\n" + std::to_string(d.width()) + " " + std::to_string(d.height()) + "\n65535\n";
    std::vector<unsigned char> payload(d.pixel_count() * 2);
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
        payload[2 * i] = static_cast<unsigned char>(d.data()[i] >> 8);
        payload[2 * i + 1] = static_cast<unsigned char>(d.data()[i] & 0xff);
    }
    detail::spit(path, header, payload.data(), payload.size());
}

inline void write_raster(const std::filesystem::path& path, const AnyRaster& r) {
    std::visit([&](const auto& img) { write_raster(path, img); }, r);
}

template <typename T>
T read_raster_as(const std::filesystem::path& path) {
    AnyRaster r = read_raster(path);
    if (auto* p = std::get_if<T>(&r)) return std::move(*p);
    throw Error(Errc::unsupported_format, path.string() + " holds a different raster kind");
}

inline ColorImage read_color(const std::filesystem::path& path) { return read_raster_as<ColorImage>(path); }
inline Gray8Image read_gray(const std::filesystem::path& path) { return read_raster_as<Gray8Image>(path); }
inline DepthMap read_depth(const std::filesystem::path& path) { return read_raster_as<DepthMap>(path); }

} // namespace depthfuse
