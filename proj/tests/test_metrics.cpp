#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "depthfuse/filters.hpp"
#include "depthfuse/metrics.hpp"
#include "depthfuse/simulate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace depthfuse;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using test::entropy_oracle;
using test::q_mi_oracle;
using test::q_ncie_oracle;

std::vector<int> levels(const GrayImage& g) { return test::gray_levels(g); }

GrayImage from_levels(Size s, std::vector<double> v) { return GrayImage(s, std::move(v)); }

// ---- scalar Q_G oracle -----------------------------------------------------

double q_g_oracle(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QgParams& p) {
    const int w = f.width(), h = f.height();
    auto px = [](const GrayImage& g, int x, int y) {
        x = std::clamp(x, 0, g.width() - 1);
        y = std::clamp(y, 0, g.height() - 1);
        return g(x, y);
    };
    auto field = [&](const GrayImage& g, int x, int y, double& strength, double& angle) {
        double sx = 0, sy = 0;
        const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
        for (int j = -1; j <= 1; ++j)
            for (int i = -1; i <= 1; ++i) {
                sx += kx[j + 1][i + 1] * px(g, x + i, y + j);
                sy += kx[i + 1][j + 1] * px(g, x + i, y + j);
            }
        strength = std::hypot(sx, sy);
        angle = sy == 0 ? (sx == 0 ? 0.0 : std::numbers::pi / 2) : std::atan(sx / sy);
    };
    auto q = [&](double gx, double ax, double gf, double af) {
        double G = 1, D = 1;
        if (gx > 0 || gf > 0) {
            G = std::min(gx, gf) / std::max(gx, gf);
            double d = std::abs(ax - af);
            d = std::min(d, std::numbers::pi - d);
            D = 1 - d / (std::numbers::pi / 2);
        }
        return p.gamma_g / (1 + std::exp(p.k_g * (G - p.sigma_g))) * p.gamma_a / (1 + std::exp(p.k_a * (D - p.sigma_a)));
    };
    double num = 0, den = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double ga, aa, gb, ab, gf, af;
            field(a, x, y, ga, aa);
            field(b, x, y, gb, ab);
            field(f, x, y, gf, af);
            num += ga * q(ga, aa, gf, af) + gb * q(gb, ab, gf, af);
            den += ga + gb;
        }
    return num / den;
}

// ---- simulator scenes for ordering tests ------------------------------------

struct Triple {
    GrayImage a, b, truth;
};

Triple simulated_triple(std::uint32_t seed) {
    SceneSpec spec = random_two_layer_scene(seed, Size{128, 96});
    const auto scene = render_stack(spec);
    return {rgb_to_gray(scene.sources[0]), rgb_to_gray(scene.sources[1]), rgb_to_gray(scene.ground_truth)};
}

GrayImage uniform_histogram_image(std::uint32_t seed) {
    std::vector<double> v(256 * 256);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 256);
    std::shuffle(v.begin(), v.end(), std::mt19937(seed));
    return GrayImage(Size{256, 256}, std::move(v));
}

using MetricFn = double (*)(const GrayImage&, const GrayImage&, const GrayImage&);
const std::pair<const char*, MetricFn> kMetrics[] = {
    {"q_mi", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_mi(a, b, f); }},
    {"q_ncie", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_ncie(a, b, f); }},
    {"q_g", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_g(a, b, f); }},
    {"q_p", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_p(a, b, f); }},
    {"q_y", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_y(a, b, f); }},
    {"q_cb", [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_cb(a, b, f); }},
};

} // namespace

// ---- Q_MI ------------------------------------------------------------------

TEST(QMi, IdentityIsTwo) {
    for (std::uint32_t s = 0; s < 5; ++s) {
        const auto x = test::textured_gray(Size{48, 40}, s);
        EXPECT_NEAR(q_mi(x, x, x), 2.0, 1e-9);
    }
}

TEST(QMi, IndependentNoiseNearZero) {
    // The plug-in joint entropy over 256x256 bins needs many samples before
    // its bias stops masking independence.
    const Size s{1024, 1024};
    const auto a = test::random_gray(s, 1), b = test::random_gray(s, 2), f = test::random_gray(s, 3);
    EXPECT_LT(q_mi(a, b, f), 0.05);
}

TEST(QMi, TwoByTwoHandValue) {
    // H(A) = H(F) = 1 bit, H(A,F) = 2 bits: no shared information.
    const auto a = from_levels(Size{2, 2}, {0, 0, 255, 255});
    const auto f = from_levels(Size{2, 2}, {0, 255, 0, 255});
    EXPECT_NEAR(q_mi(a, a, f), 0.0, 1e-12);
    EXPECT_NEAR(q_mi(a, a, f), q_mi_oracle(a, a, f), 1e-12);
    EXPECT_NEAR(q_mi(a, a, a), 2.0, 1e-12);
}

TEST(QMi, ConstantImagesStayInRange) {
    const GrayImage c(Size{8, 8}, 50.0);
    EXPECT_NEAR(q_mi(c, c, c), 2.0, 1e-12);
}

TEST(QMi, ExhaustiveFourPixelOracle) {
    auto mi = [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_mi(a, b, f); };
    auto ncie = [](const GrayImage& a, const GrayImage& b, const GrayImage& f) { return q_ncie(a, b, f); };
    EXPECT_LE(test::max_enumeration_gap(mi, q_mi_oracle), 1e-12);
    EXPECT_LE(test::max_enumeration_gap(ncie, q_ncie_oracle), 1e-12);
}

// ---- Q_NCIE ----------------------------------------------------------------

TEST(QNcie, UniformHistogramIdentityIsOne) {
    const auto x = uniform_histogram_image(1);
    EXPECT_NEAR(q_ncie(x, x, x), 1.0, 1e-6);
}

TEST(QNcie, IdentityClosedForm) {
    const auto x = test::textured_gray(Size{40, 30}, 6);
    const auto lx = levels(x);
    const double h = entropy_oracle(lx, 256);
    double expect = 1.0;
    for (double lambda : {1 + 2 * h, 1 - h, 1 - h})
        if (lambda > 0) expect += lambda / 3 * std::log(lambda / 3) / std::log(256.0);
    EXPECT_NEAR(q_ncie(x, x, x), expect, 1e-12);
}

TEST(QNcie, IndependentNoise) {
    const Size s{1024, 1024};
    const auto a = test::random_gray(s, 11), b = test::random_gray(s, 12), f = test::random_gray(s, 13);
    EXPECT_NEAR(q_ncie(a, b, f), 1.0 - std::log(3.0) / std::log(256.0), 0.02);
}

TEST(QNcie, EigenvaluesMatchEigen) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 500; ++t) {
        const double x = u(rng), y = u(rng), z = u(rng), d0 = u(rng), d1 = u(rng), d2 = u(rng);
        Eigen::Matrix3d m;
        m << d0, x, y, x, d1, z, y, z, d2;
        Eigen::Vector3d ref = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues();
        const auto got = symmetric_eigenvalues({d0, x, y, x, d1, z, y, z, d2});
        EXPECT_NEAR(got[0], ref[2], 1e-9);
        EXPECT_NEAR(got[1], ref[1], 1e-9);
        EXPECT_NEAR(got[2], ref[0], 1e-9);
    }
    const auto diag = symmetric_eigenvalues({2, 0, 0, 0, 5, 0, 0, 0, -1});
    EXPECT_EQ(diag[0], 5);
    EXPECT_EQ(diag[2], -1);
}

// ---- Q_G -------------------------------------------------------------------

TEST(QG, PerfectPreservationConstant) {
    const QgParams p;
    const double expect = 0.9994 / (1 + std::exp(-7.5)) * 0.9879 / (1 + std::exp(-4.4));
    EXPECT_NEAR(p.perfect_preservation(), expect, 1e-15);
    EXPECT_NEAR(p.perfect_preservation(), 0.9748, 1e-4);
    for (std::uint32_t s = 0; s < 3; ++s) {
        const auto x = test::textured_gray(Size{32, 32}, s);
        EXPECT_NEAR(q_g(x, x, x), expect, 1e-6);
    }
}

TEST(QG, VerticalEdgeMatchesScalarSobelOracle) {
    const auto a = from_levels(Size{3, 3}, {0, 0, 255, 0, 0, 255, 0, 0, 255});
    const auto b = from_levels(Size{3, 3}, {0, 0, 0, 0, 0, 0, 0, 0, 0});
    const auto f = from_levels(Size{3, 3}, {0, 0, 128, 0, 0, 128, 0, 10, 128});
    const QgParams p;
    EXPECT_NEAR(q_g(a, b, f, p), q_g_oracle(a, b, f, p), 1e-12);
    EXPECT_NEAR(q_g(a, a, a, p), p.perfect_preservation(), 1e-12);
}

TEST(QG, RandomImagesMatchScalarOracle) {
    for (std::uint32_t s = 0; s < 5; ++s) {
        const auto a = test::random_gray(Size{9, 7}, s), b = test::random_gray(Size{9, 7}, s + 10),
                   f = test::random_gray(Size{9, 7}, s + 20);
        EXPECT_NEAR(q_g(a, b, f), q_g_oracle(a, b, f, QgParams{}), 1e-12);
    }
}

TEST(QG, HeavierBlurScoresLower) {
    const auto a = test::textured_gray(Size{64, 64}, 3);
    const auto blurred = gaussian_blur(a, 3.0);
    EXPECT_LT(q_g(a, blurred, blurred), q_g(a, blurred, a));
}

TEST(QG, LiteralVariantDiffers) {
    const auto t = simulated_triple(2);
    QgParams literal;
    literal.orientation_sigmoid_on_strength = true;
    EXPECT_NE(q_g(t.a, t.b, t.truth), q_g(t.a, t.b, t.truth, literal));
}

TEST(QG, ConstantSourcesAreDegenerate) {
    const GrayImage c(Size{8, 8}, 3.0);
    try {
        q_g(c, c, test::random_gray(Size{8, 8}, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::degenerate_input);
    }
}

// ---- Q_P -------------------------------------------------------------------

TEST(QP, IdentityIsOne) {
    for (std::uint32_t s = 0; s < 3; ++s) {
        const auto x = test::textured_gray(Size{64, 48}, s);
        EXPECT_NEAR(q_p(x, x, x), 1.0, 1e-6);
    }
}

TEST(QP, UncorrelatedNoiseScoresLow) {
    // White noise is suppressed by the noise threshold, leaving a near-constant
    // feature map that the stabilizer scores close to 1; spatially correlated
    // noise keeps real features.
    const auto a = test::textured_gray(Size{128, 128}, 1);
    const auto t = simulated_triple(1);
    for (double sigma : {1.0, 1.5, 3.0}) {
        EXPECT_LT(q_p(a, a, gaussian_blur(test::random_gray(Size{128, 128}, 99), sigma)), 0.3);
        EXPECT_LT(q_p(t.a, t.b, gaussian_blur(test::random_gray(t.a.size(), 98), sigma)), 0.3);
    }
}

TEST(QP, BlurLadderDecreases) {
    const auto a = test::textured_gray(Size{96, 96}, 4);
    double prev = q_p(a, a, a);
    for (double sigma : {0.8, 1.5, 2.5, 4.0}) {
        const double v = q_p(a, a, gaussian_blur(a, sigma));
        EXPECT_LT(v, prev) << "sigma " << sigma;
        prev = v;
    }
}

TEST(QP, CorrelationStabilizer) {
    const auto x = test::random_gray(Size{5, 5}, 1);
    EXPECT_NEAR(stabilized_correlation(x, x, 1e-4), 1.0, 1e-12);
    const GrayImage c(Size{5, 5}, 2.0);
    EXPECT_NEAR(stabilized_correlation(c, c, 1e-4), 1.0, 1e-12);
    GrayImage neg = x;
    for (auto& v : neg.samples()) v = -v;
    EXPECT_LT(stabilized_correlation(x, neg, 1e-4), -0.99);
}

TEST(QP, TooSmall) {
    const auto x = test::random_gray(Size{31, 64}, 1);
    try {
        q_p(x, x, x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::image_too_small);
    }
}

// ---- Q_Y -------------------------------------------------------------------

TEST(QY, IdentityIsOne) {
    const auto x = test::textured_gray(Size{40, 30}, 1);
    EXPECT_NEAR(q_y(x, x, x), 1.0, 1e-6);
}

TEST(QY, InvertedFusionScoresFarBelowOne) {
    const auto x = test::textured_gray(Size{40, 30}, 2);
    GrayImage inv = x;
    for (auto& v : inv.samples()) v = 255.0 - v;
    EXPECT_LT(q_y(x, x, inv), 0.2);
}

TEST(QY, ConstantAndTexturedTakesSecondBranch) {
    const GrayImage a(Size{40, 30}, 90.0);
    const auto b = test::random_gray(Size{40, 30}, 3);
    EXPECT_NEAR(q_y(a, b, b), 1.0, 1e-9);
}

TEST(QY, MatchesDirectWindowLoop) {
    const auto a = test::random_gray(Size{12, 10}, 1), b = test::random_gray(Size{12, 10}, 2),
               f = test::random_gray(Size{12, 10}, 3);
    const double c1 = 6.5025, c2 = 58.5225;
    auto ssim = [&](const GrayImage& x, const GrayImage& y, int x0, int y0, double& vx) {
        double mx = 0, my = 0;
        for (int j = 0; j < 7; ++j)
            for (int i = 0; i < 7; ++i) mx += x(x0 + i, y0 + j), my += y(x0 + i, y0 + j);
        mx /= 49, my /= 49;
        double sxx = 0, syy = 0, sxy = 0;
        for (int j = 0; j < 7; ++j)
            for (int i = 0; i < 7; ++i) {
                const double dx = x(x0 + i, y0 + j) - mx, dy = y(x0 + i, y0 + j) - my;
                sxx += dx * dx, syy += dy * dy, sxy += dx * dy;
            }
        vx = sxx / 49;
        return ((2 * mx * my + c1) * (2 * sxy / 49 + c2)) / ((mx * mx + my * my + c1) * (sxx / 49 + syy / 49 + c2));
    };
    double total = 0;
    int n = 0;
    for (int y0 = 0; y0 + 7 <= 10; ++y0)
        for (int x0 = 0; x0 + 7 <= 12; ++x0) {
            double va, vb, vdummy;
            const double ab = ssim(a, b, x0, y0, va);
            ssim(b, a, x0, y0, vb);
            const double af = ssim(a, f, x0, y0, vdummy), bf = ssim(b, f, x0, y0, vdummy);
            const double lambda = va + vb > 0 ? va / (va + vb) : 0.5;
            total += ab >= 0.75 ? lambda * af + (1 - lambda) * bf : std::max(af, bf);
            ++n;
        }
    EXPECT_NEAR(q_y(a, b, f), total / n, 1e-10);
}

TEST(QY, Errors) {
    EXPECT_THROW(q_y(GrayImage(Size{6, 6}), GrayImage(Size{6, 6}), GrayImage(Size{6, 6})), Error);
    EXPECT_THROW(q_y(GrayImage(Size{8, 8}), GrayImage(Size{9, 8}), GrayImage(Size{8, 8})), Error);
}

// ---- Q_CB ------------------------------------------------------------------

TEST(QCb, IdentityIsOne) {
    for (auto csf : {ContrastSensitivity::dog, ContrastSensitivity::mannos_sakrison, ContrastSensitivity::barten}) {
        const auto x = test::textured_gray(Size{48, 40}, 2);
        QcbParams p;
        p.csf = csf;
        EXPECT_NEAR(q_cb(x, x, x, p), 1.0, 1e-3);
    }
}

TEST(QCb, ConstantImagesAreOne) {
    const GrayImage c(Size{16, 16}, 120.0);
    EXPECT_NEAR(q_cb(c, c, c), 1.0, 1e-12);
}

TEST(QCb, SharpFusionBeatsBlurredFusion) {
    const auto a = test::textured_gray(Size{64, 64}, 5);
    const auto b = gaussian_blur(a, 1.5);
    EXPECT_GT(q_cb(a, b, a), q_cb(a, b, gaussian_blur(b, 2.0)));
}

TEST(QCb, CsfShapes) {
    EXPECT_NEAR(contrast_sensitivity(0, ContrastSensitivity::dog), 1 - 0.7622, 1e-12);
    EXPECT_GT(contrast_sensitivity(4, ContrastSensitivity::dog), contrast_sensitivity(40, ContrastSensitivity::dog));
    EXPECT_GT(contrast_sensitivity(0, ContrastSensitivity::barten), 0.0);
    EXPECT_EQ(contrast_sensitivity(0, ContrastSensitivity::barten), contrast_sensitivity(3, ContrastSensitivity::barten));
    EXPECT_NEAR(contrast_sensitivity(0, ContrastSensitivity::mannos_sakrison), 2.6 * 0.0192, 1e-12);
}

// ---- shared properties -----------------------------------------------------

TEST(MetricProperties, MirroringInvariance) {
    const auto t = simulated_triple(3);
    const auto ma = mirror_horizontal(t.a), mb = mirror_horizontal(t.b), mf = mirror_horizontal(gaussian_blur(t.truth, 0.7));
    const auto f = gaussian_blur(t.truth, 0.7);
    for (const auto& [name, fn] : kMetrics) EXPECT_NEAR(fn(t.a, t.b, f), fn(ma, mb, mf), 1e-9) << name;
}

TEST(MetricProperties, BlurLadderOnSimulatorScenes) {
    for (std::uint32_t seed = 1; seed <= 6; ++seed) {
        const auto t = simulated_triple(seed);
        const GrayImage ladder[] = {t.truth, gaussian_blur(t.truth, 1.5), gaussian_blur(t.truth, 3.0)};
        for (const auto& [name, fn] : kMetrics) {
            const double v0 = fn(t.a, t.b, ladder[0]), v1 = fn(t.a, t.b, ladder[1]), v2 = fn(t.a, t.b, ladder[2]);
            EXPECT_GT(v0, v1) << name << " seed " << seed;
            EXPECT_GT(v1, v2) << name << " seed " << seed;
        }
    }
}

// ---- evaluate_all and reports ------------------------------------------------

TEST(EvaluateAll, IdentityOnUniformHistogram) {
    const auto x = uniform_histogram_image(3);
    const auto r = evaluate_all(x, x, x);
    EXPECT_TRUE(r.errors.empty());
    EXPECT_NEAR(r.q_mi, 2.0, 1e-9);
    EXPECT_NEAR(r.q_ncie, 1.0, 1e-6);
    EXPECT_NEAR(r.q_g, QgParams{}.perfect_preservation(), 1e-6);
    EXPECT_NEAR(r.q_p, 1.0, 1e-6);
    EXPECT_NEAR(r.q_y, 1.0, 1e-6);
    EXPECT_NEAR(r.q_cb, 1.0, 1e-3);
}

TEST(EvaluateAll, FailuresAreRecorded) {
    const GrayImage c(Size{16, 16}, 4.0);
    const auto r = evaluate_all(c, c, c);
    EXPECT_TRUE(std::isnan(r.q_g));
    EXPECT_TRUE(std::isnan(r.q_p));
    EXPECT_TRUE(r.errors.contains("q_g"));
    EXPECT_TRUE(r.errors.contains("q_p"));
    EXPECT_NEAR(r.q_mi, 2.0, 1e-12);
    EXPECT_NEAR(r.q_y, 1.0, 1e-12);
}

TEST(EvaluateAll, ColorConvertsToGray) {
    const auto a = test::random_color(Size{40, 40}, 1), b = test::random_color(Size{40, 40}, 2);
    const auto rc = evaluate_all(a, b, a);
    const auto rg = evaluate_all(rgb_to_gray(a), rgb_to_gray(b), rgb_to_gray(a));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(rc.values()[i], rg.values()[i]);
}

TEST(MetricReport, CsvRoundTrip) {
    const auto t = simulated_triple(4);
    const auto r = evaluate_all(t.a, t.b, t.truth);
    const auto back = metric_report_from_csv(to_csv(r));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(back.values()[i], r.values()[i]);
    MetricReport partial;
    partial.q_mi = 1.25;
    const auto p2 = metric_report_from_csv(to_csv(partial));
    EXPECT_EQ(p2.q_mi, 1.25);
    EXPECT_TRUE(std::isnan(p2.q_cb));
    EXPECT_NE(to_markdown(partial).find("n/a"), std::string::npos);
    EXPECT_TRUE(nlohmann::json(partial)["q_cb"].is_null());
}

// ---- ranking ---------------------------------------------------------------

TEST(RankMethods, ReproducesReferenceTables) {
    const auto table = parse_metric_table(slurp(DEPTHFUSE_DATA_DIR "/method_scores.csv"));
    const auto expected = parse_metric_table(slurp(DEPTHFUSE_DATA_DIR "/method_scores_expected.csv"));
    ASSERT_EQ(table.rows.size(), 30u);
    const auto scores = rank_methods(table);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t m = 0; m < 8; ++m)
            EXPECT_EQ(scores.row_scores[r][m], expected.rows[r].values[m])
                << table.rows[r].scene << " " << table.rows[r].metric << " " << table.methods[m];
    const std::vector<std::string> order{"Ours", "DCNN", "DSIFT", "IM", "GF", "NSCT-PCNN", "DWT", "NSCT"};
    const std::vector<int> totals{229, 197, 180, 160, 125, 85, 73, 31};
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_EQ(scores.methods[scores.ranking[k]], order[k]);
        EXPECT_EQ(scores.totals[scores.ranking[k]], totals[k]);
        EXPECT_EQ(scores.rank_of[scores.ranking[k]], static_cast<int>(k + 1));
    }
    const auto md = totals_to_markdown(scores);
    EXPECT_NE(md.find("| Ours"), std::string::npos);
    EXPECT_NE(totals_to_csv(scores).find("Ours,"), std::string::npos);
    EXPECT_NE(scores_to_markdown(table, scores).find("1.4201 (7)"), std::string::npos);
}

TEST(RankMethods, SingleMethodScoresOne) {
    MetricTable t{{"only"}, {{"1", "q_mi", {0.3}}, {"1", "q_g", {0.9}}}};
    const auto s = rank_methods(t);
    EXPECT_EQ(s.totals[0], 2);
    EXPECT_EQ(s.row_scores[0][0], 1);
}

TEST(RankMethods, TiesShareTheHigherScore) {
    MetricTable t{{"a", "b", "c"}, {{"1", "q", {0.5, 0.5, 0.1}}, {"1", "r", {0.2, 0.2, 0.2}}}};
    const auto s = rank_methods(t);
    EXPECT_EQ(s.row_scores[0], (std::vector<int>{3, 3, 1}));
    EXPECT_EQ(s.row_scores[1], (std::vector<int>{3, 3, 3}));
    EXPECT_EQ(s.totals[0], s.totals[1]);
    EXPECT_EQ(s.ranking[0], 0u); // equal totals keep input order
}

TEST(RankMethods, Errors) {
    MetricTable nan_table{{"a", "b"}, {{"1", "q", {0.5, std::numeric_limits<double>::quiet_NaN()}}}};
    try {
        rank_methods(nan_table);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::nan_input);
    }
    EXPECT_THROW(rank_methods(MetricTable{}), Error);
    EXPECT_THROW(parse_metric_table("scene,metric,a\n1,q,0.5x\n"), Error);
    EXPECT_THROW(parse_metric_table("scene,metric,a,b\n1,q,0.5\n"), Error);
    EXPECT_THROW(parse_metric_table("name,metric,a\n"), Error);
}
