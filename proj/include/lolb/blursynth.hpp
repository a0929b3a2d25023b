#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "lolb/darkener.hpp"
#include "lolb/degrade.hpp"
#include "lolb/image.hpp"

namespace lolb::blur {

struct BlurConfig {
    int window = 7;              // source frames per blurred sample
    int interp_factor = 8;       // k: output frames per source interval
    double r_min = 20.0;         // supplementary value range, 8-bit units
    double r_max = 100.0;
    double delta = 98.0;         // L* saturation threshold
    double duty_cycle = 0.8;     // fraction of the interpolated stream that is averaged
    bool clipping_reverse = true;

    /// Throws ConfigError. Window oddness is checked by make_pair, which needs a mid frame.
    void validate() const;
};

/// Produces intermediate frames between consecutive source frames.
class FrameInterpolator {
public:
    virtual ~FrameInterpolator() = default;
    virtual FrameSequence interpolate(const FrameSequence& seq, int k) const = 0;
};

/// Linear cross-fade: between F_i and F_{i+1} inserts F_i + (j/k)(F_{i+1} - F_i), j = 1..k-1.
class LinearInterpolator final : public FrameInterpolator {
public:
    FrameSequence interpolate(const FrameSequence& seq, int k) const override;
};

/// (n-1)*k + 1 frames at k times the input rate. Throws InsufficientFramesError
/// for a single frame with k > 1 and DomainError for non-SRGB input.
FrameSequence interpolate_frames(const FrameSequence& seq, int k);

/// Adds r/255 to every channel of masked pixels of a LINEAR frame.
ImageF clipping_reverse(const ImageF& frame, const SaturationMask& mask, double r);

/// Number of leading frames averaged out of `n` interpolated frames: ceil(duty * n).
int averaged_frame_count(int n, double duty_cycle);

struct BlurRecord {
    double r = 0.0;
    int interpolated_frames = 0;
    int averaged_frames = 0;
    std::size_t saturated_pixels = 0;  // summed over averaged frames
};

/// B = g(mean_i Clip^-1(g^-1(S_i))) over the first ceil(duty*N) interpolated frames.
/// One r per call is drawn uniformly from [r_min, r_max] using `seed`.
ImageF synth_blur(const FrameSequence& seq, const BlurConfig& cfg, std::uint64_t seed,
                  BlurRecord* record = nullptr, const FrameInterpolator* interpolator = nullptr);

/// Averaging core on already-interpolated SRGB frames with a fixed r.
ImageF average_frames(const FrameSequence& frames, const BlurConfig& cfg, double r, BlurRecord* record = nullptr);

struct DarkenConfig {
    bool enabled = true;
    double target_min = 0.05;
    double target_max = 0.3;
    int iterations = 3;
    double smoothness = 32.0;
    double amplitude = 0.25;
    double base_level = -0.5;

    void validate() const;
};

struct PairRecord {
    std::uint64_t seed = 0;
    int window = 0;
    int interp_factor = 0;
    double duty_cycle = 0.0;
    bool clipping_reverse = false;
    BlurRecord blur;
    bool darkened = false;
    double exposure_target = 0.0;
    double exposure_achieved = 0.0;
    double alpha_min = 0.0, alpha_mean = 0.0, alpha_max = 0.0;
    degrade::DegradeRecord degradation;

    /// key = value text sidecar.
    std::string to_text() const;
};

struct Pair {
    ImageF low_blur;
    ImageF gt;
    PairRecord record;
    darken::AlphaMap alpha;  // empty when darkening is disabled
};

/// Full degradation of one sharp clip: darken -> interpolate -> clipping reverse
/// + average -> defocus -> noise. gt is the untouched middle frame.
Pair make_pair(const FrameSequence& sharp, const BlurConfig& cfg, const DarkenConfig& dark,
               const degrade::DegradeConfig& deg, std::uint64_t seed,
               const FrameInterpolator* interpolator = nullptr);

}  // namespace lolb::blur
