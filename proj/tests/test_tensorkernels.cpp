#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lolb/net/gradsuite.hpp"
#include "lolb/nn/kernels.hpp"
#include "lolb/nn/layers.hpp"
#include "lolb/nn/tensor_io.hpp"
#include "test_util.hpp"

using namespace lolb;
using namespace lolb::nn;

namespace {

int mirror(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
}

// Brute-force "same" convolution, independent of the library's loop order.
TensorD conv_oracle(const TensorD& x, const TensorD& w, const TensorD& b, ConvSpec spec) {
    const int K = w.dim(1), cout = w.dim(0), cin = w.dim(3), p = K / 2;
    const int oh = (x.h() + 2 * p - K) / spec.stride + 1, ow = (x.w() + 2 * p - K) / spec.stride + 1;
    TensorD out(oh, ow, cout);
    for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
            for (int co = 0; co < cout; ++co) {
                double s = b[std::size_t(co)];
                for (int u = 0; u < K; ++u)
                    for (int v = 0; v < K; ++v) {
                        int sy = y * spec.stride + u - p, sx = xx * spec.stride + v - p;
                        if (spec.pad == Padding::Reflect) {
                            sy = mirror(sy, x.h());
                            sx = mirror(sx, x.w());
                        } else if (sy < 0 || sx < 0 || sy >= x.h() || sx >= x.w()) {
                            continue;
                        }
                        for (int ci = 0; ci < cin; ++ci)
                            s += w[((std::size_t(co) * K + u) * K + v) * cin + ci] * x.at(sy, sx, ci);
                    }
                out.at(y, xx, co) = s;
            }
    return out;
}

TensorD fac_oracle(const TensorD& D, const TensorD& K, int d) {
    TensorD out(D.dims());
    const int r = d / 2;
    for (int y = 0; y < D.h(); ++y)
        for (int x = 0; x < D.w(); ++x)
            for (int c = 0; c < D.c(); ++c) {
                double s = 0.0;
                for (int u = 0; u < d; ++u)
                    for (int v = 0; v < d; ++v) {
                        const int sy = y + u - r, sx = x + v - r;
                        if (sy < 0 || sx < 0 || sy >= D.h() || sx >= D.w()) continue;
                        s += K.at(y, x, c * d * d + u * d + v) * D.at(sy, sx, c);
                    }
                out.at(y, x, c) = s;
            }
    return out;
}

double max_abs_diff(const TensorD& a, const TensorD& b) {
    EXPECT_TRUE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <typename Store>
void zero_all(Store& s) {
    for (auto& p : s) p.value.fill(0);
}

}  // namespace

TEST(TensorKernels, OneByOneIdentityConvolution) {
    Rng rng(1);
    const auto x = test::random_tensor<float>(rng, {5, 4, 3});
    TensorF w(std::vector<int>{3, 1, 1, 3});
    for (int c = 0; c < 3; ++c) w[std::size_t(c) * 3 + std::size_t(c)] = 1.0f;
    EXPECT_EQ(conv2d_forward(x, w, TensorF(std::vector<int>{3})), x);
}

TEST(TensorKernels, ConvolutionMatchesNestedLoopOracle) {
    Rng rng(2);
    for (Padding pad : {Padding::Zero, Padding::Reflect})
        for (int stride : {1, 2})
            for (int k : {1, 3, 5}) {
                const auto x = test::random_tensor<double>(rng, {9, 8, 3});
                const auto w = test::random_tensor<double>(rng, {4, k, k, 3});
                const auto b = test::random_tensor<double>(rng, {4});
                const ConvSpec spec{stride, pad};
                EXPECT_LE(max_abs_diff(conv2d_forward(x, w, b, spec), conv_oracle(x, w, b, spec)), 1e-6)
                    << "k=" << k << " stride=" << stride;
            }
}

TEST(TensorKernels, ConvolutionOutputSize) {
    EXPECT_EQ(conv_out_size(16, 3, 2), 8);
    EXPECT_EQ(conv_out_size(7, 3, 2), 4);
    EXPECT_EQ(conv_out_size(7, 5, 1), 7);
}

TEST(TensorKernels, ConvolutionBiasGradientIsUpstreamSum) {
    Rng rng(3);
    const auto x = test::random_tensor<double>(rng, {5, 5, 2});
    const auto w = test::random_tensor<double>(rng, {3, 3, 3, 2});
    const auto gy = test::random_tensor<double>(rng, {5, 5, 3});
    const auto g = conv2d_backward(x, w, gy);
    for (int co = 0; co < 3; ++co) {
        double s = 0.0;
        for (int y = 0; y < 5; ++y)
            for (int xx = 0; xx < 5; ++xx) s += gy.at(y, xx, co);
        EXPECT_NEAR(g.bias[std::size_t(co)], s, 1e-12);
    }
}

TEST(TensorKernels, ParallelConvolutionMatchesReferenceExactly) {
    Rng rng(4);
    for (Padding pad : {Padding::Zero, Padding::Reflect})
        for (int stride : {1, 2}) {
            const ConvSpec spec{stride, pad};
            const auto x = test::random_tensor<float>(rng, {13, 11, 5});
            const auto w = test::random_tensor<float>(rng, {6, 3, 3, 5});
            const auto b = test::random_tensor<float>(rng, {6});
            const auto y = conv2d_forward(x, w, b, spec);
            EXPECT_EQ(y, ref::conv2d_forward(x, w, b, spec));
            const auto gy = test::random_tensor<float>(rng, y.dims());
            const auto g1 = conv2d_backward(x, w, gy, spec);
            const auto g2 = ref::conv2d_backward(x, w, gy, spec);
            EXPECT_EQ(g1.x, g2.x);
            EXPECT_EQ(g1.weights, g2.weights);
            EXPECT_EQ(g1.bias, g2.bias);
        }
}

TEST(TensorKernels, ConvolutionShapeErrors) {
    EXPECT_THROW(conv2d_forward(TensorF(4, 4, 3), TensorF(std::vector<int>{2, 3, 3, 2}), TensorF(std::vector<int>{2})), ShapeError);
    EXPECT_THROW(conv2d_forward(TensorF(4, 4, 3), TensorF(std::vector<int>{2, 2, 2, 3}), TensorF(std::vector<int>{2})), ShapeError);
    EXPECT_THROW(conv2d_forward(TensorF(4, 4, 3), TensorF(std::vector<int>{2, 3, 3, 3}), TensorF(std::vector<int>{3})), ShapeError);
}

TEST(TensorKernels, CurveWithZeroParametersIsClampedIdentity) {
    Rng rng(5);
    const auto f = test::random_tensor<double>(rng, {4, 4, 3}, -0.5, 1.5);
    const TensorD a(4, 4, 3);
    const auto out = curve_nlu_forward(f, a, 3);
    const auto gy = test::random_tensor<double>(rng, {4, 4, 3});
    const auto g = curve_nlu_backward(f, a, 3, gy);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_DOUBLE_EQ(out[i], std::clamp(f[i], 0.0, 1.0));
        const bool inside = f[i] > 0.0 && f[i] < 1.0;
        EXPECT_DOUBLE_EQ(g.features[i], inside ? gy[i] : 0.0);
    }
}

TEST(TensorKernels, CurveHandValues) {
    const TensorD f(1, 1, 1, 0.5);
    EXPECT_DOUBLE_EQ(curve_nlu_forward(f, TensorD(1, 1, 1, 1.0), 1)[0], 0.75);
    TensorD a(1, 1, 2);
    a[0] = 1.0;
    a[1] = 0.5;
    // 0.75 + 0.5 * 0.75 * 0.25
    EXPECT_DOUBLE_EQ(curve_nlu_forward(f, a, 2)[0], 0.84375);
}

TEST(TensorKernels, CurveSharesParametersAcrossChannels) {
    TensorD f(1, 1, 3);
    f[0] = 0.2;
    f[1] = 0.2;
    f[2] = 0.7;
    const auto out = curve_nlu_forward(f, TensorD(1, 1, 2, 0.6), 2);
    EXPECT_DOUBLE_EQ(out[0], out[1]);
    EXPECT_GT(out[2], out[0]);
}

TEST(TensorKernels, CurveRejectsBadParameters) {
    EXPECT_THROW(curve_nlu_forward(TensorD(2, 2, 3), TensorD(2, 2, 3, 1.5), 3), ValidationError);
    EXPECT_THROW(curve_nlu_forward(TensorD(2, 2, 3), TensorD(2, 2, 2), 3), ShapeError);
    EXPECT_THROW(curve_nlu_forward(TensorD(2, 2, 3), TensorD(2, 2, 0), 0), ValidationError);
}

TEST(TensorKernels, FacMatchesNestedLoopOracle) {
    Rng rng(6);
    for (int d : {1, 3, 5}) {
        const auto D = test::random_tensor<double>(rng, {7, 6, 3});
        const auto K = test::random_tensor<double>(rng, {7, 6, 3 * d * d});
        EXPECT_LE(max_abs_diff(fac_forward(D, K, d), fac_oracle(D, K, d)), 1e-6) << "d=" << d;
    }
}

TEST(TensorKernels, FacIdentityFilterPassesFeaturesAndGradients) {
    Rng rng(7);
    const int d = 5, C = 2;
    const auto D = test::random_tensor<double>(rng, {6, 6, C});
    TensorD K(6, 6, C * d * d);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            for (int c = 0; c < C; ++c) K.at(y, x, c * d * d + (d * d) / 2) = 1.0;
    EXPECT_EQ(fac_forward(D, K, d), D);
    const auto gy = test::random_tensor<double>(rng, {6, 6, C});
    EXPECT_EQ(fac_backward(D, K, d, gy).features, gy);
}

TEST(TensorKernels, FacZeroUpstreamGivesZeroGradients) {
    Rng rng(8);
    const auto D = test::random_tensor<double>(rng, {4, 5, 2});
    const auto K = test::random_tensor<double>(rng, {4, 5, 18});
    const auto g = fac_backward(D, K, 3, TensorD(4, 5, 2));
    for (double v : g.features.data()) EXPECT_EQ(v, 0.0);
    for (double v : g.filters.data()) EXPECT_EQ(v, 0.0);
}

TEST(TensorKernels, ParallelFacMatchesReferenceExactly) {
    Rng rng(9);
    const auto D = test::random_tensor<float>(rng, {12, 9, 4});
    const auto K = test::random_tensor<float>(rng, {12, 9, 4 * 25});
    const auto gy = test::random_tensor<float>(rng, {12, 9, 4});
    EXPECT_EQ(fac_forward(D, K, 5), ref::fac_forward(D, K, 5));
    const auto a = fac_backward(D, K, 5, gy);
    const auto b = ref::fac_backward(D, K, 5, gy);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.filters, b.filters);
}

TEST(TensorKernels, FacChannelContract) {
    EXPECT_THROW(fac_forward(TensorF(4, 4, 2), TensorF(4, 4, 17), 3), ShapeError);
    EXPECT_THROW(fac_forward(TensorF(4, 4, 2), TensorF(4, 3, 18), 3), ShapeError);
}

TEST(TensorKernels, AdaptivePoolBins) {
    Rng rng(10);
    const auto x = test::random_tensor<double>(rng, {6, 6, 2});
    const auto g = adaptive_avg_pool_forward(x, 1);
    double mean = 0.0;
    for (int y = 0; y < 6; ++y)
        for (int xx = 0; xx < 6; ++xx) mean += x.at(y, xx, 1);
    EXPECT_NEAR(g.at(0, 0, 1), mean / 36.0, 1e-12);
    EXPECT_EQ(adaptive_avg_pool_forward(x, 6), x);
    // More bins than pixels repeats cells instead of failing.
    const auto up = adaptive_avg_pool_forward(TensorD(2, 2, 1, 0.25), 6);
    for (double v : up.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(TensorKernels, ResizeProperties) {
    Rng rng(11);
    const auto x = test::random_tensor<double>(rng, {5, 7, 2});
    EXPECT_EQ(resize_forward(x, 5, 7), x);
    const auto c = resize_forward(TensorD(3, 3, 2, 0.4), 9, 5);
    for (double v : c.data()) EXPECT_NEAR(v, 0.4, 1e-12);
    // Each output distributes unit weight, so the gradient mass is conserved.
    const auto gy = test::random_tensor<double>(rng, {11, 4, 2});
    const auto gx = resize_backward(x.dims(), gy);
    double sy = 0.0, sx = 0.0;
    for (double v : gy.data()) sy += v;
    for (double v : gx.data()) sx += v;
    EXPECT_NEAR(sx, sy, 1e-10);
}

TEST(TensorKernels, ConcatSplitRoundTrip) {
    Rng rng(12);
    const auto a = test::random_tensor<float>(rng, {3, 4, 2});
    const auto b = test::random_tensor<float>(rng, {3, 4, 5});
    const auto cat = concat_channels<float>({&a, &b});
    EXPECT_EQ(cat.c(), 7);
    const auto parts = split_channels(cat, {2, 5});
    EXPECT_EQ(parts[0], a);
    EXPECT_EQ(parts[1], b);
    EXPECT_THROW(split_channels(cat, {2, 4}), ShapeError);
}

TEST(TensorKernels, L1LossValueAndGradient) {
    TensorD p(2, 2, 1, 0.6), t(2, 2, 1, 0.5);
    p[3] = 0.2;
    EXPECT_NEAR(l1_loss(p, t), (0.1 * 3 + 0.3) / 4.0, 1e-12);
    const auto g = l1_loss_grad(p, t);
    EXPECT_DOUBLE_EQ(g[0], 0.25);
    EXPECT_DOUBLE_EQ(g[3], -0.25);
}

TEST(Layers, CurveEstimatorWithZeroWeightsOutputsHalf) {
    ParamStore<double> s;
    CurveEstimator<double> est(s, "ce", 4, 3);
    zero_all(s);
    Rng rng(13);
    const auto out = est.forward(test::random_tensor<double>(rng, {5, 5, 4}));
    EXPECT_EQ(out.c(), 3);
    for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Layers, CurveEstimatorOutputInUnitInterval) {
    ParamStore<double> s;
    CurveEstimator<double> est(s, "ce", 4, 2);
    s.initialize(3);
    Rng rng(14);
    const auto out = est.forward(test::random_tensor<double>(rng, {6, 6, 4}, -20, 20));
    for (double v : out.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Layers, PyramidPoolingOfConstantIsConstant) {
    ParamStore<double> s;
    PyramidPooling<double> ppm(s, "ppm", 8);
    s.initialize(5);
    const auto out = ppm.forward(TensorD(12, 12, 8, 0.3));
    ASSERT_EQ(out.dims(), (std::vector<int>{12, 12, 8}));
    // Interior pixels see identical neighbourhoods; the zero-padded border differs.
    for (int c = 0; c < 8; ++c)
        for (int y = 1; y < 11; ++y)
            for (int x = 1; x < 11; ++x) EXPECT_NEAR(out.at(y, x, c), out.at(5, 5, c), 1e-12);
}

TEST(Layers, PyramidPoolingAcceptsSmallMaps) {
    ParamStore<float> s;
    PyramidPooling<float> ppm(s, "ppm", 4);
    s.initialize(1);
    EXPECT_EQ(ppm.forward(TensorF(2, 2, 4, 0.1f)).dims(), (std::vector<int>{2, 2, 4}));
}

TEST(Layers, FilterHeadExpandsToCdd) {
    ParamStore<double> s;
    FilterHead<double> head(s, "h", 3, 5);
    s.initialize(2);
    EXPECT_EQ(head.forward(TensorD(4, 4, 3, 0.2)).c(), 75);
}

TEST(Layers, ZeroFilterHeadZeroesFacOutput) {
    ParamStore<double> s;
    FilterAdaptiveSkip<double> fasc(s, "f", 2, 3);
    zero_all(s);
    Rng rng(15);
    const auto out = fasc.forward(test::random_tensor<double>(rng, {5, 5, 2}), test::random_tensor<double>(rng, {5, 5, 2}));
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Layers, FreshFilterHeadWithZeroExpansionIsIdentitySkip) {
    ParamStore<double> s;
    FilterAdaptiveSkip<double> fasc(s, "f", 2, 5);
    s.initialize(4);
    s.find("f.head.expand.w")->value.fill(0.0);
    Rng rng(16);
    const auto dec = test::random_tensor<double>(rng, {6, 6, 2});
    EXPECT_EQ(fasc.forward(dec, test::random_tensor<double>(rng, {6, 6, 2})), dec);
}

TEST(Layers, ZeroResidualPathIsIdentity) {
    ParamStore<double> s;
    ResidualBlock<double> rb(s, "rb", 3);
    zero_all(s);
    Rng rng(17);
    const auto x = test::random_tensor<double>(rng, {5, 5, 3});
    EXPECT_EQ(rb.forward(x), x);
}

TEST(Layers, DownAndUpChangeScale) {
    ParamStore<float> s;
    ResidualDown<float> down(s, "d", 3, 8);
    ResidualUp<float> up(s, "u", 8, 3);
    s.initialize(1);
    const auto h = down.forward(TensorF(16, 12, 3, 0.5f));
    EXPECT_EQ(h.dims(), (std::vector<int>{8, 6, 8}));
    EXPECT_EQ(up.forward(h).dims(), (std::vector<int>{16, 12, 3}));
}

TEST(Params, InitialisationIsSeededPerName) {
    ParamStore<float> a, b;
    a.add("x.w", {4, 3, 3, 2}, Init::HeUniform, 18);
    a.add("y.w", {4, 3, 3, 2}, Init::HeUniform, 18);
    b.add("y.w", {4, 3, 3, 2}, Init::HeUniform, 18);
    a.initialize(7);
    b.initialize(7);
    EXPECT_EQ(a.find("y.w")->value, b.find("y.w")->value);
    EXPECT_NE(a.find("x.w")->value, a.find("y.w")->value);
    const double bound = std::sqrt(6.0 / 18.0);
    for (float v : a.find("x.w")->value.data()) EXPECT_LE(std::abs(v), bound);
    EXPECT_THROW(a.add("x.w", {1}, Init::Zero), ConfigError);
}

TEST(Params, FacIdentityBias) {
    ParamStore<float> s;
    s.add("b", {2 * 9}, Init::FacIdentity, 1, 3);
    s.initialize(1);
    for (std::size_t i = 0; i < 18; ++i) EXPECT_EQ(s[0].value[i], (i % 9 == 4) ? 1.0f : 0.0f);
}

TEST(TensorIo, RoundTripAndLayout) {
    Rng rng(18);
    const auto t = test::random_tensor<float>(rng, {3, 2, 4});
    std::stringstream ss;
    write_tensor(ss, t);
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 4 + 4 + 3 * 4 + 24 * 4u);
    EXPECT_EQ(bytes.substr(0, 4), "TNSR");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3u);  // rank, little endian
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3u);  // first dim
    EXPECT_EQ(read_tensor(ss), t);
}

TEST(TensorIo, BadMagicIsIoError) {
    std::stringstream ss("XXXX\x01\x00\x00\x00");
    EXPECT_THROW(read_tensor(ss), IoError);
    std::stringstream truncated(std::string("TNSR\x01\x00\x00\x00\x05\x00\x00\x00", 12));
    EXPECT_THROW(read_tensor(truncated), IoError);
}

class GradientSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientSuite, FiniteDifferencesAgree) {
    const auto results = net::run_gradient_suite(GetParam(), net::kDefaultGradSeeds);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_TRUE(results[0].pass) << GetParam() << " max rel err " << results[0].max_rel_error;
    EXPECT_LT(results[0].max_rel_error, results[0].tolerance);
}

std::vector<std::string> suite_names() {
    std::vector<std::string> names;
    for (const auto& c : net::gradient_cases())
        if (!c.negative_control) names.push_back(c.name);
    return names;
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientSuite, ::testing::ValuesIn(suite_names()),
                         [](const ::testing::TestParamInfo<std::string>& info) {
                             std::string n = info.param;
                             for (char& ch : n)
                                 if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                             return n;
                         });

TEST(GradientSuiteControl, CorruptedBackwardIsCaught) {
    const auto results = net::run_gradient_suite("negative/*", net::kDefaultGradSeeds, true);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_FALSE(results[0].pass);
}

TEST(GradientSuiteControl, GlobSelectsOnlyMatchingOps) {
    const auto results = net::run_gradient_suite("fac*", {1});
    ASSERT_EQ(results.size(), 1u);
    EXPECT_EQ(results[0].name, "fac");
    EXPECT_TRUE(net::run_gradient_suite("negative/*", {1}).empty());
}
