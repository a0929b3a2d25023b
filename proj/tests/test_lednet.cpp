#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lolb/error.hpp"
#include "lolb/net/lednet.hpp"
#include "lolb/net/loss.hpp"
#include "lolb/net/train.hpp"
#include "test_util.hpp"

using namespace lolb;
using namespace lolb::net;
using nn::TensorD;
using nn::TensorF;

namespace {

LEDNetConfig small_config() {
    LEDNetConfig cfg;
    cfg.base_channels = 8;
    return cfg;
}

std::vector<TrainingPair> toy_pairs(int n, int size = 32) {
    std::vector<TrainingPair> pairs;
    for (int i = 0; i < n; ++i) {
        const ImageF gt = test::random_image(100 + i, size, size);
        ImageF low = gt;
        for (float& v : low.data()) v *= 0.2f;
        pairs.push_back({image_to_tensor(low), image_to_tensor(gt), "p" + std::to_string(i)});
    }
    return pairs;
}

TrainConfig quick_train(long steps) {
    TrainConfig t;
    t.steps = steps;
    t.batch = 2;
    t.patch = 16;
    t.log_every = 0;
    return t;
}

}  // namespace

struct Ablation {
    const char* name;
    bool ppm, curve;
    SkipMode skip;
};

class LEDNetShapes : public ::testing::TestWithParam<Ablation> {};

TEST_P(LEDNetShapes, OutputMatchesInputAndIntermediateIsEighth) {
    LEDNetConfig cfg = small_config();
    cfg.use_ppm = GetParam().ppm;
    cfg.use_curve_nlu = GetParam().curve;
    cfg.skip_mode = GetParam().skip;
    LEDNet<float> net(cfg);
    net.params().initialize(1);
    Rng rng(2);
    const auto trace = net.forward(test::random_tensor<float>(rng, {24, 40, 3}, 0, 1));
    EXPECT_EQ(trace.output.dims(), (std::vector<int>{24, 40, 3}));
    EXPECT_EQ(trace.intermediate.dims(), (std::vector<int>{3, 5, 3}));
    EXPECT_EQ(trace.encoder_features[2].dims(), (std::vector<int>{3, 5, 32}));
    for (const auto& a : trace.curve_params) EXPECT_EQ(a.size() == 0, !GetParam().curve);
}

INSTANTIATE_TEST_SUITE_P(Ablations, LEDNetShapes,
                         ::testing::Values(Ablation{"full", true, true, SkipMode::FASC},
                                           Ablation{"no_ppm", false, true, SkipMode::FASC},
                                           Ablation{"no_curve", true, false, SkipMode::FASC},
                                           Ablation{"concat", true, true, SkipMode::CONCAT}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(LEDNet, AblationsChangeParameterCount) {
    auto count = [](LEDNetConfig cfg) { return LEDNet<float>(cfg).params().element_count(); };
    LEDNetConfig full = small_config(), no_ppm = full, no_curve = full, concat = full;
    no_ppm.use_ppm = false;
    no_curve.use_curve_nlu = false;
    concat.skip_mode = SkipMode::CONCAT;
    EXPECT_GT(count(full), count(no_ppm));
    EXPECT_GT(count(full), count(no_curve));
    EXPECT_NE(count(full), count(concat));
    EXPECT_NE(full.architecture_hash(), concat.architecture_hash());
}

TEST(LEDNet, InputShapeContract) {
    LEDNet<float> net(small_config());
    net.params().initialize(1);
    EXPECT_THROW(net.forward(TensorF(20, 16, 3)), ShapeError);
    EXPECT_THROW(net.forward(TensorF(16, 16, 1)), ShapeError);
    EXPECT_NO_THROW(net.forward(TensorF(8, 8, 3)));
    EXPECT_THROW(check_input_shape(0, 8), ShapeError);
}

TEST(LEDNet, ConfigValidation) {
    LEDNetConfig cfg;
    EXPECT_EQ(cfg.width(1), 16);
    EXPECT_EQ(cfg.width(3), 64);
    cfg.fac_d = 4;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(parse_skip_mode("concat"), SkipMode::CONCAT);
    EXPECT_THROW(parse_skip_mode("sum"), ConfigError);
}

TEST(Loss, DefaultWeights) {
    const LEDNetConfig cfg;
    EXPECT_DOUBLE_EQ(cfg.lambda_per, 0.01);
    EXPECT_DOUBLE_EQ(cfg.lambda_en, 0.8);
    EXPECT_DOUBLE_EQ(cfg.lambda_deb, 1.0);
}

TEST(Loss, PerfectPredictionIsZero) {
    Rng rng(3);
    const auto y = test::random_tensor<double>(rng, {16, 16, 3}, 0, 1);
    ForwardTrace<double> t;
    t.output = y;
    t.intermediate = downsample8(y);
    const auto r = compute_loss(t, y, LEDNetConfig{});
    EXPECT_EQ(r.parts.total, 0.0);
}

TEST(Loss, UniformOffsetHandValue) {
    Rng rng(4);
    const auto y = test::random_tensor<double>(rng, {16, 16, 3}, 0, 0.8);
    ForwardTrace<double> t;
    t.output = y;
    t.intermediate = downsample8(y);
    for (auto& v : t.output.data()) v += 0.1;
    for (auto& v : t.intermediate.data()) v += 0.1;
    const auto r = compute_loss(t, y, LEDNetConfig{});
    EXPECT_NEAR(r.parts.l_en, 0.1, 1e-12);
    EXPECT_NEAR(r.parts.l_deb, 0.1, 1e-12);
    EXPECT_NEAR(r.parts.total, 0.18, 1e-12);  // 0.8 * 0.1 + 1 * 0.1

    LEDNetConfig no_en;
    no_en.use_enh_loss = false;
    const auto r2 = compute_loss(t, y, no_en);
    EXPECT_NEAR(r2.parts.total, 0.1, 1e-12);
    for (double g : r2.grad_intermediate.data()) EXPECT_EQ(g, 0.0);
}

TEST(Loss, DownsampleOfConstantIsConstant) {
    const auto d = downsample8(TensorD(24, 16, 3, 0.35));
    EXPECT_EQ(d.dims(), (std::vector<int>{3, 2, 3}));
    for (double v : d.data()) EXPECT_NEAR(v, 0.35, 1e-12);
}

TEST(Optimiser, CosineSchedule) {
    EXPECT_DOUBLE_EQ(cosine_lr(1e-3, 0, 100), 1e-3);
    EXPECT_NEAR(cosine_lr(1e-3, 50, 100), 5e-4, 1e-15);
    EXPECT_NEAR(cosine_lr(1e-3, 100, 100), 0.0, 1e-15);
}

TEST(Optimiser, AdamFirstStepMovesByLearningRate) {
    nn::ParamStore<double> s;
    auto& p = s.add("p", {3}, nn::Init::Zero);
    p.grad[0] = 2.0;
    p.grad[1] = -0.5;
    adam_step(s, 0.01);
    // Bias correction makes the first update lr * sign(g).
    EXPECT_NEAR(p.value[0], -0.01, 1e-9);
    EXPECT_NEAR(p.value[1], 0.01, 1e-9);
    EXPECT_EQ(p.value[2], 0.0);
    EXPECT_EQ(s.step, 1);
}

TEST(Optimiser, ZeroGradientsLeaveParametersInPlace) {
    LEDNet<float> net(small_config());
    net.params().initialize(5);
    std::vector<TensorF> before;
    for (const auto& p : net.params()) before.push_back(p.value);
    net.params().zero_grad();
    adam_step(net.params(), 1e-3);
    std::size_t i = 0;
    for (const auto& p : net.params()) {
        const auto& b = before[i++];
        for (std::size_t e = 0; e < b.size(); ++e) ASSERT_LT(std::abs(p.value[e] - b[e]), 1e-8f) << p.name;
    }
}

TEST(Optimiser, NonFiniteGradientIsReported) {
    nn::ParamStore<float> s;
    auto& p = s.add("bad", {2}, nn::Init::Zero);
    p.grad[1] = std::numeric_limits<float>::quiet_NaN();
    try {
        check_finite_gradients(s, 7);
        FAIL() << "expected TrainingDivergedError";
    } catch (const TrainingDivergedError& e) {
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
    }
}

TEST(Training, PatchSamplingIsPureFunctionOfIndices) {
    const auto pairs = toy_pairs(3);
    const auto a = sample_patch(pairs, 16, true, 9, 4, 1);
    const auto b = sample_patch(pairs, 16, true, 9, 4, 1);
    EXPECT_EQ(a.input, b.input);
    EXPECT_EQ(a.target, b.target);
    EXPECT_EQ(a.input.dims(), (std::vector<int>{16, 16, 3}));
    EXPECT_THROW(sample_patch(pairs, 64, false, 9, 0, 0), ValidationError);
}

TEST(Training, ShortRunIsDeterministicAndLearns) {
    const auto pairs = toy_pairs(2);
    auto run = [&] {
        LEDNet<float> net(small_config());
        net.params().initialize(11);
        return train(net, pairs, quick_train(30), 3);
    };
    const auto a = run();
    const auto b = run();
    ASSERT_EQ(a.size(), 30u);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].total, b[i].total);
    EXPECT_LT(a.back().total, a.front().total);
    EXPECT_EQ(a.back().step, 30);
}

TEST(Training, ResumeFromCheckpointMatchesUninterruptedRun) {
    const auto pairs = toy_pairs(2);
    const auto dir = test::scratch("resume_ckpt");
    LEDNet<float> live(small_config());
    live.params().initialize(11);
    train(live, pairs, quick_train(6), 3);
    save_checkpoint(dir, live);

    LEDNet<float> resumed(small_config());
    load_checkpoint(dir, resumed);
    const auto a = train(live, pairs, quick_train(12), 3);
    const auto b = train(resumed, pairs, quick_train(12), 3);
    ASSERT_EQ(a.size(), 6u);
    EXPECT_EQ(a.front().step, 7);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].total, b[i].total);
}

TEST(Checkpoint, RoundTripRestoresEverything) {
    const auto dir = test::scratch("ckpt_roundtrip");
    LEDNet<float> net(small_config());
    net.params().initialize(21);
    train(net, toy_pairs(1), quick_train(3), 1);
    save_checkpoint(dir, net);
    LEDNet<float> back(small_config());
    load_checkpoint(dir, back);
    EXPECT_EQ(back.params().step, 3);
    for (std::size_t i = 0; i < net.params().size(); ++i) {
        EXPECT_EQ(back.params()[i].value, net.params()[i].value);
        EXPECT_EQ(back.params()[i].m, net.params()[i].m);
        EXPECT_EQ(back.params()[i].v, net.params()[i].v);
    }
}

TEST(Checkpoint, ArchitectureMismatchAndMissingFiles) {
    const auto dir = test::scratch("ckpt_mismatch");
    LEDNet<float> net(small_config());
    net.params().initialize(1);
    save_checkpoint(dir, net);
    LEDNetConfig other = small_config();
    other.use_ppm = false;
    LEDNet<float> wrong(other);
    EXPECT_THROW(load_checkpoint(dir, wrong), ValidationError);
    EXPECT_THROW(load_checkpoint(dir / "nope", net), IoError);
}

TEST(Inference, KeepsShapeIsDeterministicAndReturnsCurves) {
    LEDNetConfig cfg = small_config();
    LEDNet<float> net(cfg);
    net.params().initialize(8);
    const ImageF img = test::random_image(5, 21, 30);
    const auto a = infer(net, img);
    const auto b = infer(net, img);
    EXPECT_EQ(a.image.height(), 21);
    EXPECT_EQ(a.image.width(), 30);
    EXPECT_TRUE(std::equal(a.image.data().begin(), a.image.data().end(), b.image.data().begin()));
    for (float v : a.image.data()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    ASSERT_EQ(a.curve_params.size(), 3u);
    for (const auto& s : a.curve_params) EXPECT_EQ(static_cast<int>(s.size()), cfg.curve_n);
}

TEST(Inference, TinyInputsArePadded) {
    LEDNet<float> net(small_config());
    net.params().initialize(8);
    const auto r = infer(net, test::random_image(6, 3, 5));
    EXPECT_EQ(r.image.height(), 3);
    EXPECT_EQ(r.image.width(), 5);
}
