#include "lolb/darkener.hpp"

#include <algorithm>
#include <cmath>

#include "lolb/color.hpp"
#include "lolb/parallel.hpp"
#include "lolb/rng.hpp"

namespace lolb::darken {

float AlphaMap::min() const { return *std::min_element(data.begin(), data.end()); }
float AlphaMap::max() const { return *std::max_element(data.begin(), data.end()); }

double AlphaMap::mean() const {
    double s = 0.0;
    for (float v : data) s += v;
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

double AlphaMap::max_neighbor_step() const {
    double m = 0.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x + 1 < width) m = std::max(m, double(std::abs(at(y, x + 1) - at(y, x))));
            if (y + 1 < height) m = std::max(m, double(std::abs(at(y + 1, x) - at(y, x))));
        }
    }
    return m;
}

void AlphaMap::validate() const {
    if (data.size() != std::size_t(height) * std::size_t(width)) throw ShapeError("alpha map size mismatch");
    for (float v : data) {
        if (!(v >= -1.0f && v <= 0.0f)) throw ValidationError("alpha value " + std::to_string(v) + " outside [-1,0]");
    }
}

AlphaMap AlphaMap::constant(int h, int w, float value) {
    AlphaMap a;
    a.height = h;
    a.width = w;
    a.smoothness = std::max(h, w);
    a.data.assign(std::size_t(h) * std::size_t(w), value);
    return a;
}

AlphaMap generate_alpha_map(std::uint64_t seed, int h, int w, double smoothness, double base_level,
                            double amplitude) {
    if (h < 1 || w < 1) throw ShapeError("alpha map dimensions must be >= 1");
    if (!(smoothness >= 1.0)) throw ConfigError("alpha map smoothness must be >= 1");
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw ConfigError("alpha map amplitude must be in [0,1]");

    const int gh = static_cast<int>(std::ceil((h - 1) / smoothness)) + 1;
    const int gw = static_cast<int>(std::ceil((w - 1) / smoothness)) + 1;
    Rng rng(seed);
    std::vector<double> grid(std::size_t(gh) * std::size_t(gw));
    for (double& g : grid) g = base_level + amplitude * uniform(rng, -1.0, 1.0);

    AlphaMap a;
    a.height = h;
    a.width = w;
    a.smoothness = smoothness;
    a.data.resize(std::size_t(h) * std::size_t(w));
    for (int y = 0; y < h; ++y) {
        const double gy = y / smoothness;
        const int y0 = std::min(static_cast<int>(gy), gh - 1);
        const int y1 = std::min(y0 + 1, gh - 1);
        const double fy = gy - y0;
        for (int x = 0; x < w; ++x) {
            const double gx = x / smoothness;
            const int x0 = std::min(static_cast<int>(gx), gw - 1);
            const int x1 = std::min(x0 + 1, gw - 1);
            const double fx = gx - x0;
            auto g = [&](int yy, int xx) { return grid[std::size_t(yy) * std::size_t(gw) + std::size_t(xx)]; };
            const double v = (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x1)) + fy * ((1 - fx) * g(y1, x0) + fx * g(y1, x1));
            a.data[std::size_t(y) * std::size_t(w) + std::size_t(x)] = static_cast<float>(std::clamp(v, -1.0, 0.0));
        }
    }
    return a;
}

ImageF apply_darkening_curve(const ImageF& img, const AlphaMap& alpha, int iterations) {
    if (iterations < 1) throw ConfigError("darkening iterations must be >= 1");
    if (alpha.height != img.height() || alpha.width != img.width()) {
        throw ShapeError("alpha map " + std::to_string(alpha.height) + "x" + std::to_string(alpha.width) +
                         " does not match image " + img.shape_string());
    }
    alpha.validate();
    ImageF out = img;
    const int c = img.channels();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(img.pixel_count());
    auto src = img.data();
    auto dst = out.data();
    LOLB_OMP(parallel for schedule(static))
    for (std::ptrdiff_t p = 0; p < n; ++p) {
        const double a = alpha.data[std::size_t(p)];
        for (int ch = 0; ch < c; ++ch) {
            double x = std::clamp(static_cast<double>(src[std::size_t(p) * c + ch]), 0.0, 1.0);
            for (int i = 0; i < iterations; ++i) x = curve_step(x, a);
            dst[std::size_t(p) * c + ch] = static_cast<float>(x);
        }
    }
    return out;
}

namespace {

AlphaMap shifted(const AlphaMap& base, double offset) {
    AlphaMap a = base;
    for (float& v : a.data) v = static_cast<float>(std::clamp(double(v) + offset, -1.0, 0.0));
    return a;
}

}  // namespace

ConditionResult condition_on_exposure(const ImageF& img, const ExposureSpec& spec, const AlphaMap& alpha_shape) {
    constexpr double kTol = 1e-3;
    if (spec.iterations < 1) throw ConfigError("exposure iterations must be >= 1");
    if (!(spec.target_mean_luminance > 0.0 && spec.target_mean_luminance < 1.0)) {
        throw ValidationError("target mean luminance must lie in (0,1)");
    }
    alpha_shape.validate();
    const double current = color::mean_luminance(img);
    const double target = spec.target_mean_luminance;
    if (target > current + kTol) {
        throw ValidationError("target mean luminance " + std::to_string(target) +
                              " is above the image's current mean " + std::to_string(current));
    }

    auto evaluate = [&](double offset) {
        ConditionResult r;
        r.offset = offset;
        r.alpha = shifted(alpha_shape, offset);
        r.image = apply_darkening_curve(img, r.alpha, spec.iterations);
        r.achieved_mean = color::mean_luminance(r.image);
        return r;
    };

    // Offset +1 pushes every alpha to 0 (identity); -1 pushes every alpha to -1.
    ConditionResult darkest = evaluate(-1.0);
    if (darkest.achieved_mean > target + kTol) throw UnreachableExposureError(target, darkest.achieved_mean);
    if (std::abs(darkest.achieved_mean - target) <= 1e-4) return darkest;

    // The mean is non-decreasing in the offset.
    double lo = -1.0;
    double hi = 1.0;
    ConditionResult best = evaluate(hi);
    if (std::abs(best.achieved_mean - target) <= 1e-4) return best;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        ConditionResult r = evaluate(mid);
        if (std::abs(r.achieved_mean - target) < std::abs(best.achieved_mean - target)) best = r;
        if (std::abs(r.achieved_mean - target) <= 1e-5) break;
        if (r.achieved_mean > target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (std::abs(best.achieved_mean - target) > kTol) throw UnreachableExposureError(target, darkest.achieved_mean);
    return best;
}

}  // namespace lolb::darken
