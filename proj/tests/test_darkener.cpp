#include <gtest/gtest.h>

#include "lolb/color.hpp"
#include "lolb/darkener.hpp"
#include "test_util.hpp"

using namespace lolb;
using namespace lolb::darken;

TEST(Darkener, CurveStepOracles) {
    EXPECT_DOUBLE_EQ(curve_step(0.8, -0.5), 0.72);
    EXPECT_DOUBLE_EQ(curve_step(curve_step(0.8, -0.5), -0.5), 0.6192);
    EXPECT_DOUBLE_EQ(curve_step(0.5, 1.0), 0.75);
    EXPECT_DOUBLE_EQ(curve_step(0.75, -0.0), 0.75);
}

TEST(Darkener, ApplyCurveMatchesHandValues) {
    const ImageF img(2, 2, 3, Domain::SRGB, 0.8f);
    const ImageF one = apply_darkening_curve(img, AlphaMap::constant(2, 2, -0.5f), 1);
    const ImageF two = apply_darkening_curve(img, AlphaMap::constant(2, 2, -0.5f), 2);
    EXPECT_NEAR(one.at(1, 1, 2), 0.72, 1e-6);
    EXPECT_NEAR(two.at(0, 1, 0), 0.6192, 1e-6);
}

TEST(Darkener, ZeroAlphaIsIdentity) {
    const ImageF img = test::random_image(3, 8, 8);
    EXPECT_EQ(apply_darkening_curve(img, AlphaMap::constant(8, 8, 0.0f), 3), img);
}

TEST(Darkener, OutputNeverBrighterAndInRange) {
    const ImageF img = test::random_image(4, 16, 12);
    const AlphaMap a = generate_alpha_map(9, 16, 12, 4.0, -0.5, 0.5);
    const ImageF out = apply_darkening_curve(img, a, 3);
    for (std::size_t i = 0; i < img.size(); ++i) {
        EXPECT_LE(out.data()[i], img.data()[i]);
        EXPECT_GE(out.data()[i], 0.0f);
    }
}

TEST(Darkener, AlphaOutsideRangeRejected) {
    const ImageF img(2, 2, 3, Domain::SRGB, 0.5f);
    EXPECT_THROW(apply_darkening_curve(img, AlphaMap::constant(2, 2, 0.2f), 1), ValidationError);
    EXPECT_THROW(apply_darkening_curve(img, AlphaMap::constant(2, 2, -1.5f), 1), ValidationError);
    EXPECT_THROW(apply_darkening_curve(img, AlphaMap::constant(3, 2, -0.5f), 1), ShapeError);
}

TEST(Darkener, AlphaMapIsSmoothBoundedAndSeeded) {
    const AlphaMap a = generate_alpha_map(5, 40, 50, 8.0, -0.5, 0.4);
    EXPECT_GE(a.min(), -1.0f);
    EXPECT_LE(a.max(), 0.0f);
    EXPECT_LE(a.max_neighbor_step(), 2.0 / 8.0 + 1e-6);
    EXPECT_EQ(a.data, generate_alpha_map(5, 40, 50, 8.0, -0.5, 0.4).data);
    EXPECT_NE(a.data, generate_alpha_map(6, 40, 50, 8.0, -0.5, 0.4).data);
}

TEST(Darkener, AlphaMapRejectsBadParameters) {
    EXPECT_THROW(generate_alpha_map(1, 4, 4, 0.5, -0.5), ConfigError);
    EXPECT_THROW(generate_alpha_map(1, 0, 4, 4.0, -0.5), ShapeError);
}

// Constant alpha bringing grey 0.8 to 0.4 in three iterations; root found offline with mpmath.
TEST(Darkener, ConditioningFindsOracleAlpha) {
    const ImageF img(6, 6, 3, Domain::SRGB, 0.8f);
    const ConditionResult r = condition_on_exposure(img, {0.4, 3}, AlphaMap::constant(6, 6, 0.0f));
    EXPECT_NEAR(r.achieved_mean, 0.4, 1e-3);
    EXPECT_NEAR(r.alpha.at(2, 3), -0.6473817678122455, 1e-4);
    EXPECT_NEAR(r.offset, -0.6473817678122455, 1e-4);
}

TEST(Darkener, ConditioningReachesTargetOnTexturedImage) {
    const ImageF img = test::random_image(11, 32, 32, 3, 0.2, 0.9);
    const AlphaMap shape = generate_alpha_map(12, 32, 32, 8.0, -0.5, 0.25);
    for (double target : {0.08, 0.12, 0.3}) {
        const ConditionResult r = condition_on_exposure(img, {target, 3}, shape);
        EXPECT_NEAR(color::mean_luminance(r.image), target, 1e-3);
        r.alpha.validate();
    }
}

TEST(Darkener, UnreachableExposureReportsFloor) {
    const ImageF img(4, 4, 3, Domain::SRGB, 0.9f);
    try {
        condition_on_exposure(img, {0.5, 1}, AlphaMap::constant(4, 4, 0.0f));
        FAIL() << "expected UnreachableExposureError";
    } catch (const UnreachableExposureError& e) {
        EXPECT_NEAR(e.achievable_min(), 0.81, 1e-6);
        EXPECT_DOUBLE_EQ(e.target(), 0.5);
        EXPECT_FALSE(e.is_validation());
    }
}

TEST(Darkener, TargetAboveCurrentIsValidationError) {
    const ImageF img(4, 4, 3, Domain::SRGB, 0.3f);
    EXPECT_THROW(condition_on_exposure(img, {0.5, 3}, AlphaMap::constant(4, 4, 0.0f)), ValidationError);
    EXPECT_THROW(condition_on_exposure(img, {0.1, 0}, AlphaMap::constant(4, 4, 0.0f)), ConfigError);
}
