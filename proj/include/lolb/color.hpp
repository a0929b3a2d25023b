#pragma once

#include <vector>

#include "lolb/image.hpp"

namespace lolb::color {

/// Exponent of the power-law camera response.
inline constexpr double kGamma = 2.2;
/// Default L* threshold above which a pixel counts as saturated.
inline constexpr double kSaturationDelta = 98.0;

/// x -> x^2.2, elementwise. Throws DomainError unless `img` is SRGB.
ImageF srgb_to_linear(const ImageF& img);

/// Clamp to [0,1], then x -> x^(1/2.2). Throws DomainError unless `img` is LINEAR.
ImageF linear_to_srgb(const ImageF& img);

/// CIE L* (D65 white) of a 3-channel sRGB image, one value per pixel in [0,100].
/// Linearisation uses the same power-law CRF as srgb_to_linear.
std::vector<float> lab_lightness(const ImageF& img);

/// L* of a single linear-light luminance Y (white Y = 1).
double lightness_from_luminance(double y);

/// mask(p) = L*(p) > delta
SaturationMask saturation_mask(const ImageF& img, double delta = kSaturationDelta);

/// Rec.709-weighted luma of an sRGB image averaged over all pixels; the mean
/// value of a grey image equals its grey level. Single-channel images use the value directly.
double mean_luminance(const ImageF& img);

/// Bilinear resampling with corner pixel centres aligned (output corners map
/// exactly onto input corners). Same-size resize returns a bit-exact copy.
ImageF resize_bilinear(const ImageF& img, int new_h, int new_w);

namespace ref {
// Serial reference used by tests and benchmarks.
ImageF resize_bilinear(const ImageF& img, int new_h, int new_w);
}  // namespace ref

}  // namespace lolb::color
