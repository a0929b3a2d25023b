#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lolb/image.hpp"
#include "lolb/rng.hpp"

namespace lolb::degrade {

/// Normalised square kernel with taps k(x,y) proportional to
/// exp(-0.5 * ((x^2 + y^2) / sigma^2)^beta), centred at ((size-1)/2, (size-1)/2).
struct DefocusKernel {
    int size = 1;
    double sigma = 1.0;
    double beta = 1.0;
    std::vector<double> taps;

    double at(int y, int x) const { return taps[std::size_t(y) * std::size_t(size) + std::size_t(x)]; }
};

struct NoiseParams {
    double shot_gain = 0.0;   // variance per unit signal
    double read_sigma = 0.0;  // additive standard deviation
};

DefocusKernel generalized_gaussian_kernel(double sigma, double beta, int size);

/// Same-size 2-D correlation with reflect padding (edge pixel not repeated), per channel.
ImageF convolve2d_reflect(const ImageF& img, const DefocusKernel& kernel);

/// out = clamp(x + n, 0, 1) with n ~ Normal(0, shot_gain * x + read_sigma^2).
ImageF add_noise(const ImageF& img, const NoiseParams& p, std::uint64_t seed);

/// Reflect index into [0, n) without repeating the edge sample (…2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n);

/// Random defocus + noise stage. Each degradation is enabled per call with its
/// own probability; parameters are drawn uniformly from the configured ranges.
struct DegradeConfig {
    double defocus_prob = 0.5;
    double sigma_min = 0.5, sigma_max = 2.0;
    double beta_min = 0.5, beta_max = 2.0;
    int kernel_size = 11;
    double noise_prob = 0.5;
    double read_sigma_min = 0.002, read_sigma_max = 0.02;
    double shot_gain_min = 0.0, shot_gain_max = 0.01;

    void validate() const;
};

struct DegradeRecord {
    bool defocus = false;
    double sigma = 0.0;
    double beta = 0.0;
    bool noise = false;
    NoiseParams noise_params;
};

ImageF apply_random_degradations(const ImageF& img, const DegradeConfig& cfg, std::uint64_t seed,
                                 DegradeRecord* record = nullptr);

namespace ref {
ImageF convolve2d_reflect(const ImageF& img, const DefocusKernel& kernel);
}  // namespace ref

}  // namespace lolb::degrade
