#include "lolb/blursynth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lolb/color.hpp"
#include "lolb/parallel.hpp"
#include "lolb/rng.hpp"

namespace lolb::blur {

void BlurConfig::validate() const {
    if (window < 1) throw ConfigError("blur.window must be >= 1");
    if (interp_factor < 1) throw ConfigError("blur.interp_factor must be >= 1");
    if (!(r_min >= 0.0 && r_max <= 255.0 && r_min <= r_max)) throw ConfigError("blur.r range must lie within [0,255]");
    if (!(delta >= 0.0 && delta <= 100.0)) throw ConfigError("blur.delta must lie in [0,100]");
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw ConfigError("blur.duty_cycle must lie in (0,1]");
}

FrameSequence LinearInterpolator::interpolate(const FrameSequence& seq, int k) const {
    FrameSequence out;
    out.fps = seq.fps * k;
    const std::size_t n = seq.size();
    out.frames.reserve((n - 1) * std::size_t(k) + 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const ImageF& a = seq.frames[i];
        const ImageF& b = seq.frames[i + 1];
        out.frames.push_back(a);
        for (int j = 1; j < k; ++j) {
            const float t = static_cast<float>(j) / static_cast<float>(k);
            ImageF f = a;
            auto fa = a.data();
            auto fb = b.data();
            auto fo = f.data();
            for (std::size_t e = 0; e < fo.size(); ++e) fo[e] = fa[e] + t * (fb[e] - fa[e]);
            out.frames.push_back(std::move(f));
        }
    }
    out.frames.push_back(seq.frames.back());
    return out;
}

FrameSequence interpolate_frames(const FrameSequence& seq, int k) {
    if (k < 1) throw ConfigError("interpolation factor must be >= 1");
    seq.validate();
    if (seq.frames.front().domain() != Domain::SRGB) throw DomainError("interpolate_frames expects SRGB frames");
    if (k == 1) return seq;
    if (seq.size() < 2) throw InsufficientFramesError("interpolation needs at least 2 frames");
    return LinearInterpolator{}.interpolate(seq, k);
}

ImageF clipping_reverse(const ImageF& frame, const SaturationMask& mask, double r) {
    if (frame.domain() != Domain::LINEAR) throw DomainError("clipping_reverse expects a LINEAR frame");
    if (mask.height != frame.height() || mask.width != frame.width()) {
        throw ShapeError("saturation mask does not match frame " + frame.shape_string());
    }
    if (!(r >= 0.0 && r <= 255.0)) throw ConfigError("supplementary value r must lie in [0,255]");
    ImageF out = frame;
    const float add = static_cast<float>(r / 255.0);
    const int c = frame.channels();
    auto px = out.data();
    for (std::size_t p = 0; p < mask.data.size(); ++p) {
        if (!mask.data[p]) continue;
        for (int ch = 0; ch < c; ++ch) px[p * c + ch] += add;
    }
    return out;
}

int averaged_frame_count(int n, double duty_cycle) {
    // Guard against ceil(0.8 * 5) evaluating to 5 because of 4.0000000001.
    const int m = static_cast<int>(std::ceil(duty_cycle * n - 1e-9));
    return std::clamp(m, 1, n);
}

ImageF average_frames(const FrameSequence& frames, const BlurConfig& cfg, double r, BlurRecord* record) {
    cfg.validate();
    frames.validate();
    if (frames.frames.front().domain() != Domain::SRGB) throw DomainError("average_frames expects SRGB frames");
    const int n = static_cast<int>(frames.size());
    const int used = averaged_frame_count(n, cfg.duty_cycle);
    const ImageF& first = frames.frames.front();
    const bool reverse = cfg.clipping_reverse && first.channels() == 3;
    const double add = r / 255.0;
    const int c = first.channels();
    const std::ptrdiff_t npx = static_cast<std::ptrdiff_t>(first.pixel_count());

    std::vector<double> acc(first.size(), 0.0);
    std::size_t saturated = 0;
    for (int i = 0; i < used; ++i) {
        const ImageF& f = frames.frames[std::size_t(i)];
        SaturationMask mask = reverse ? color::saturation_mask(f, cfg.delta) : SaturationMask::empty_like(f);
        saturated += mask.count();
        auto px = f.data();
        LOLB_OMP(parallel for schedule(static))
        for (std::ptrdiff_t p = 0; p < npx; ++p) {
            const double extra = mask.data[std::size_t(p)] ? add : 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t e = std::size_t(p) * c + ch;
                acc[e] += std::pow(static_cast<double>(px[e]), color::kGamma) + extra;
            }
        }
    }

    ImageF linear(first.height(), first.width(), c, Domain::LINEAR);
    auto out = linear.data();
    for (std::size_t e = 0; e < acc.size(); ++e) out[e] = static_cast<float>(acc[e] / used);
    if (record) {
        record->r = reverse ? r : 0.0;
        record->interpolated_frames = n;
        record->averaged_frames = used;
        record->saturated_pixels = saturated;
    }
    return color::linear_to_srgb(linear);
}

ImageF synth_blur(const FrameSequence& seq, const BlurConfig& cfg, std::uint64_t seed, BlurRecord* record,
                  const FrameInterpolator* interpolator) {
    cfg.validate();
    seq.validate();
    if (static_cast<int>(seq.size()) != cfg.window) {
        throw ConfigError("synth_blur expects " + std::to_string(cfg.window) + " frames, got " + std::to_string(seq.size()));
    }
    Rng rng(seed);
    const double r = uniform(rng, cfg.r_min, cfg.r_max);
    FrameSequence dense;
    if (interpolator && cfg.interp_factor > 1) {
        if (seq.size() < 2) throw InsufficientFramesError("interpolation needs at least 2 frames");
        dense = interpolator->interpolate(seq, cfg.interp_factor);
    } else {
        dense = interpolate_frames(seq, cfg.interp_factor);
    }
    return average_frames(dense, cfg, r, record);
}

void DarkenConfig::validate() const {
    if (!(target_min > 0.0 && target_max < 1.0 && target_min <= target_max)) {
        throw ConfigError("darken target range must lie within (0,1)");
    }
    if (iterations < 1) throw ConfigError("darken.iterations must be >= 1");
    if (!(smoothness >= 1.0)) throw ConfigError("darken.smoothness must be >= 1");
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw ConfigError("darken.amplitude must be in [0,1]");
    if (!(base_level >= -1.0 && base_level <= 0.0)) throw ConfigError("darken.base_level must be in [-1,0]");
}

std::string PairRecord::to_text() const {
    std::ostringstream os;
    os.precision(9);
    os << "seed = " << seed << '\n'
       << "window = " << window << '\n'
       << "interp_factor = " << interp_factor << '\n'
       << "interpolated_frames = " << blur.interpolated_frames << '\n'
       << "averaged_frames = " << blur.averaged_frames << '\n'
       << "duty_cycle = " << duty_cycle << '\n'
       << "clipping_reverse = " << (clipping_reverse ? "true" : "false") << '\n'
       << "r = " << blur.r << '\n'
       << "saturated_pixels = " << blur.saturated_pixels << '\n'
       << "darkened = " << (darkened ? "true" : "false") << '\n'
       << "exposure_target = " << exposure_target << '\n'
       << "exposure_achieved = " << exposure_achieved << '\n'
       << "alpha_min = " << alpha_min << '\n'
       << "alpha_mean = " << alpha_mean << '\n'
       << "alpha_max = " << alpha_max << '\n'
       << "defocus = " << (degradation.defocus ? "true" : "false") << '\n'
       << "defocus_sigma = " << degradation.sigma << '\n'
       << "defocus_beta = " << degradation.beta << '\n'
       << "noise = " << (degradation.noise ? "true" : "false") << '\n'
       << "noise_shot_gain = " << degradation.noise_params.shot_gain << '\n'
       << "noise_read_sigma = " << degradation.noise_params.read_sigma << '\n';
    return os.str();
}

Pair make_pair(const FrameSequence& sharp, const BlurConfig& cfg, const DarkenConfig& dark,
               const degrade::DegradeConfig& deg, std::uint64_t seed, const FrameInterpolator* interpolator) {
    cfg.validate();
    dark.validate();
    deg.validate();
    sharp.validate();
    if (cfg.window % 2 == 0) throw ConfigError("blur.window must be odd so the clip has a middle frame");
    if (static_cast<int>(sharp.size()) != cfg.window) {
        throw ConfigError("make_pair expects " + std::to_string(cfg.window) + " frames, got " + std::to_string(sharp.size()));
    }
    const ImageF& mid = sharp.frames[sharp.size() / 2];
    if (mid.domain() != Domain::SRGB) throw DomainError("make_pair expects SRGB frames");

    Pair pair;
    pair.gt = mid;
    PairRecord& rec = pair.record;
    rec.seed = seed;
    rec.window = cfg.window;
    rec.interp_factor = cfg.interp_factor;
    rec.duty_cycle = cfg.duty_cycle;
    rec.clipping_reverse = cfg.clipping_reverse;

    FrameSequence dim = sharp;
    if (dark.enabled) {
        Rng rng(derive_seed(seed, "darken"));
        double target = uniform(rng, dark.target_min, dark.target_max);
        const std::uint64_t alpha_seed = rng();
        const double current = color::mean_luminance(mid);
        // Scenes already darker than the drawn target are darkened to half their level.
        if (target >= current) target = 0.5 * current;
        const darken::AlphaMap shape = darken::generate_alpha_map(alpha_seed, mid.height(), mid.width(),
                                                                  dark.smoothness, dark.base_level, dark.amplitude);
        darken::ConditionResult cond = darken::condition_on_exposure(mid, {target, dark.iterations}, shape);
        for (ImageF& f : dim.frames) f = darken::apply_darkening_curve(f, cond.alpha, dark.iterations);
        rec.darkened = true;
        rec.exposure_target = target;
        rec.exposure_achieved = cond.achieved_mean;
        rec.alpha_min = cond.alpha.min();
        rec.alpha_mean = cond.alpha.mean();
        rec.alpha_max = cond.alpha.max();
        pair.alpha = std::move(cond.alpha);
    }

    ImageF blurred = synth_blur(dim, cfg, derive_seed(seed, "blur"), &rec.blur, interpolator);
    pair.low_blur = degrade::apply_random_degradations(blurred, deg, derive_seed(seed, "degrade"), &rec.degradation);
    return pair;
}

}  // namespace lolb::blur
