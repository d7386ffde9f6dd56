#include <fstream>

#include <gtest/gtest.h>

#include "depthfuse/calibration.hpp"
#include "depthfuse/raster.hpp"
#include "depthfuse/raster_io.hpp"
#include "support.hpp"

using namespace depthfuse;
using depthfuse::test::TempDir;

namespace {

Errc error_code(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::invalid_argument;
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

} // namespace

TEST(RgbToGray, WhiteIsFullScale) {
    const ColorImage white(Size{5, 3}, 255);
    const auto g = rgb_to_gray(white);
    for (double v : g.samples()) EXPECT_NEAR(v, 255.0, 1e-9);
}

TEST(RgbToGray, PureBlue) {
    ColorImage blue(Size{4, 4}, 0);
    for (std::size_t p = 0; p < blue.pixel_count(); ++p) blue.data()[3 * p + 2] = 255;
    const auto g = rgb_to_gray(blue);
    for (double v : g.samples()) EXPECT_NEAR(v, 29.07, 1e-9);
}

TEST(RgbToGray, MatchesScalarOracle) {
    const auto img = test::random_color(Size{4, 4}, 7);
    const auto g = rgb_to_gray(img);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double expect = 0.299 * img(x, y, 0) + 0.587 * img(x, y, 1) + 0.114 * img(x, y, 2);
            EXPECT_DOUBLE_EQ(g(x, y), expect);
            EXPECT_GE(g(x, y), 0.0);
            EXPECT_LE(g(x, y), 255.0);
        }
}

TEST(RgbToGray, IndependentOfThreadCount) {
    const auto img = test::random_color(Size{97, 61}, 3);
    set_thread_count(1);
    const auto single = rgb_to_gray(img);
    set_thread_count(4);
    const auto multi = rgb_to_gray(img);
    set_thread_count(0);
    EXPECT_EQ(single, multi);
}

TEST(Raster, RejectsBadDimensions) {
    EXPECT_THROW(GrayImage(Size{0, 3}), Error);
    EXPECT_THROW(GrayImage(Size{2, 2}, std::vector<double>(3)), Error);
}

TEST(Raster, ClampedAccessReplicatesBorder) {
    GrayImage g(Size{2, 2}, std::vector<double>{1, 2, 3, 4});
    EXPECT_EQ(g.clamped(-5, 0), 1);
    EXPECT_EQ(g.clamped(9, 9), 4);
    EXPECT_EQ(g.clamped(1, -1), 2);
}

TEST(RasterIo, DepthRoundTripIsBitIdentical) {
    TempDir dir;
    DepthMap d(Size{640, 480});
    std::mt19937 rng(11);
    for (auto& z : d.samples()) z = static_cast<std::uint16_t>(rng());
    write_raster(dir / "d.pgm", d);
    EXPECT_EQ(read_depth(dir / "d.pgm"), d);
}

TEST(RasterIo, GrayAndColorRoundTrip) {
    TempDir dir;
    const auto color = test::random_color(Size{33, 17}, 5);
    const auto gray = quantize(test::random_gray(Size{21, 9}, 6));
    write_raster(dir / "c.png", color);
    write_raster(dir / "g.pgm", gray);
    EXPECT_EQ(read_color(dir / "c.png"), color);
    EXPECT_EQ(read_gray(dir / "g.pgm"), gray);
    EXPECT_TRUE(std::holds_alternative<ColorImage>(read_raster(dir / "c.png")));
    EXPECT_TRUE(std::holds_alternative<Gray8Image>(read_raster(dir / "g.pgm")));
}

TEST(RasterIo, SixteenBitPgmIsBigEndian) {
    TempDir dir;
    write_bytes(dir / "d.pgm", std::string("P5\n# depth\n2 1\n65535\n") + "\x01\x02\xff\xff");
    const auto d = read_depth(dir / "d.pgm");
    EXPECT_EQ(d(0, 0), 0x0102);
    EXPECT_EQ(d(1, 0), 65535);
}

TEST(RasterIo, TruncatedPayload) {
    TempDir dir;
    write_bytes(dir / "t.pgm", std::string("P5 4 4 65535\n") + std::string(10, '\x01'));
    EXPECT_EQ(error_code([&] { read_depth(dir / "t.pgm"); }), Errc::truncated_payload);
}

TEST(RasterIo, HeaderErrors) {
    TempDir dir;
    write_bytes(dir / "m.pgm", "P6 1 1 255\n\x01");
    EXPECT_EQ(error_code([&] { read_raster(dir / "m.pgm"); }), Errc::malformed_header);
    write_bytes(dir / "o.pgm", "P5 99999999999 1 255\n");
    EXPECT_EQ(error_code([&] { read_raster(dir / "o.pgm"); }), Errc::dimension_overflow);
    write_bytes(dir / "z.pgm", "P5 0 1 255\n");
    EXPECT_EQ(error_code([&] { read_raster(dir / "z.pgm"); }), Errc::malformed_header);
    write_bytes(dir / "bad.png", "not a png at all");
    EXPECT_EQ(error_code([&] { read_raster(dir / "bad.png"); }), Errc::malformed_header);
    EXPECT_EQ(error_code([&] { read_raster(dir / "missing.png"); }), Errc::open_failed);
    EXPECT_EQ(error_code([&] { read_raster(dir / "x.bmp"); }), Errc::unsupported_format);
}

TEST(RasterIo, WrongKindIsRejected) {
    TempDir dir;
    write_raster(dir / "g.pgm", Gray8Image(Size{2, 2}, 7));
    EXPECT_EQ(error_code([&] { read_depth(dir / "g.pgm"); }), Errc::unsupported_format);
}

TEST(Calibration, JsonRoundTrip) {
    TempDir dir;
    Calibration c{{580, 581, 320, 240}, {520, 522, 318, 241}, Extrinsics::translation(25, -1, 2), {}};
    c.extrinsics.R = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    save_calibration(dir / "c.json", c);
    const auto back = load_calibration(dir / "c.json");
    EXPECT_EQ(back.ir.fx, 580);
    EXPECT_EQ(back.color.v0, 241);
    EXPECT_EQ(back.extrinsics.R, c.extrinsics.R);
    EXPECT_EQ(back.extrinsics.T, c.extrinsics.T);
    EXPECT_EQ(back.optics.f_number, 4.0);
}

TEST(Calibration, Validation) {
    TempDir dir;
    write_bytes(dir / "bad.json", "{\"ir_intrinsics\": {\"fx\": 1}}");
    EXPECT_EQ(error_code([&] { load_calibration(dir / "bad.json"); }), Errc::malformed_calibration);
    EXPECT_EQ(error_code([&] { load_calibration(dir / "none.json"); }), Errc::open_failed);
    Extrinsics e;
    e.R[0] = 2.0;
    EXPECT_EQ(error_code([&] { e.validate(); }), Errc::non_orthonormal_rotation);
}

TEST(Calibration, InverseUndoesTransform) {
    Extrinsics e = Extrinsics::translation(10, 20, -5);
    e.R = {0, 0, 1, 1, 0, 0, 0, 1, 0};
    const auto p = e.apply(1, 2, 3);
    const auto q = e.inverse().apply(p[0], p[1], p[2]);
    EXPECT_NEAR(q[0], 1, 1e-12);
    EXPECT_NEAR(q[1], 2, 1e-12);
    EXPECT_NEAR(q[2], 3, 1e-12);
}
