#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lolb/nn/layers.hpp"

namespace lolb::net {

enum class SkipMode { FASC, CONCAT };

const char* to_string(SkipMode m);
SkipMode parse_skip_mode(const std::string& s);

struct LEDNetConfig {
    int base_channels = 16;  // widths base, 2*base, 4*base at 1/2, 1/4, 1/8 scale
    int scales = 3;
    int curve_n = 3;
    int fac_d = 5;
    bool use_ppm = true;
    bool use_curve_nlu = true;
    SkipMode skip_mode = SkipMode::FASC;
    bool use_enh_loss = true;
    double lambda_per = 0.01;
    double lambda_en = 0.8;
    double lambda_deb = 1.0;

    void validate() const;
    int width(int scale) const { return base_channels << (scale - 1); }
    /// Architecture fingerprint; loss weights are excluded.
    std::string architecture_key() const;
    std::uint64_t architecture_hash() const;
};

template <typename T>
struct ForwardTrace {
    nn::Tensor<T> output;        // same shape as the input
    nn::Tensor<T> intermediate;  // enhanced image at 1/8 scale
    std::array<nn::Tensor<T>, 3> encoder_features;  // after each scale block
    std::array<nn::Tensor<T>, 3> curve_params;      // empty when CurveNLU is disabled
};

/// Low-light enhancement encoder + deblurring decoder with filter-adaptive
/// (or concatenation) skips. Images are (H, W, 3) tensors with H and W
/// divisible by 8.
template <typename T>
class LEDNet {
public:
    explicit LEDNet(const LEDNetConfig& cfg);
    LEDNet(const LEDNet&) = delete;
    LEDNet& operator=(const LEDNet&) = delete;

    const LEDNetConfig& config() const { return cfg_; }
    nn::ParamStore<T>& params() { return params_; }
    const nn::ParamStore<T>& params() const { return params_; }

    ForwardTrace<T> forward(const nn::Tensor<T>& x);
    /// Backpropagates gradients of the output and intermediate image through
    /// the most recent forward pass, accumulating into params().
    void backward(const nn::Tensor<T>& grad_output, const nn::Tensor<T>& grad_intermediate);

private:
    struct EncoderScale {
        nn::ResidualBlock<T> res;
        nn::ResidualDown<T> down;
        std::unique_ptr<nn::PyramidPooling<T>> ppm;
        std::unique_ptr<nn::CurveNLU<T>> curve;
    };
    struct DecoderScale {
        std::unique_ptr<nn::FilterAdaptiveSkip<T>> fasc;
        std::unique_ptr<nn::ConcatSkip<T>> concat;
        nn::ResidualBlock<T> res1, res2;
        nn::ResidualUp<T> up;
    };

    LEDNetConfig cfg_;
    nn::ParamStore<T> params_;
    nn::Conv2d<T> conv_in_;
    std::array<EncoderScale, 3> enc_;
    nn::Conv2d<T> enhance_head_;
    std::array<DecoderScale, 3> dec_;  // index 0 = finest
    nn::Conv2d<T> conv_out_;
};

/// Checks the input-size contract: H, W divisible by 8 and at least 8.
void check_input_shape(int h, int w);

}  // namespace lolb::net
