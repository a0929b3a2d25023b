#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lolb/image.hpp"

namespace lolb::darken {

/// Per-pixel curve coefficient field. Values lie in [-1,0]; neighbouring
/// entries differ by at most 2/smoothness.
struct AlphaMap {
    int height = 0;
    int width = 0;
    double smoothness = 1.0;
    std::vector<float> data;

    float at(int y, int x) const { return data[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
    float min() const;
    float max() const;
    double mean() const;
    /// Largest absolute difference between 4-neighbours.
    double max_neighbor_step() const;
    /// Throws ValidationError when any value is outside [-1,0].
    void validate() const;

    static AlphaMap constant(int h, int w, float value);
};

struct ExposureSpec {
    double target_mean_luminance = 0.15;
    int iterations = 3;
};

/// Smooth seeded random field: a coarse grid with one node every `smoothness`
/// pixels holds base_level + amplitude * U(-1,1); the grid is bilinearly
/// upsampled to h x w and clamped to [-1,0].
AlphaMap generate_alpha_map(std::uint64_t seed, int h, int w, double smoothness, double base_level,
                            double amplitude = 0.25);

/// One step of the darkening curve: x + alpha*x*(1-x).
inline double curve_step(double x, double alpha) { return x + alpha * x * (1.0 - x); }

/// Applies `iterations` steps of the reversed curve per channel with the same
/// alpha for every channel of a pixel. Output <= input and stays in [0,1].
ImageF apply_darkening_curve(const ImageF& img, const AlphaMap& alpha, int iterations);

struct ConditionResult {
    ImageF image;
    AlphaMap alpha;
    double offset = 0.0;
    double achieved_mean = 0.0;
};

/// Finds a global offset o such that darkening with clamp(alpha_shape + o, -1, 0)
/// reaches spec.target_mean_luminance within 1e-3, by bisection on o in [-1, 1].
/// Throws ValidationError when the target is not below the current mean (beyond
/// the 1e-3 tolerance) and UnreachableExposureError when alpha == -1 is not dark enough.
ConditionResult condition_on_exposure(const ImageF& img, const ExposureSpec& spec, const AlphaMap& alpha_shape);

}  // namespace lolb::darken
