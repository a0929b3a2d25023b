#include "lolb/net/lednet.hpp"

#include <sstream>

#include "lolb/rng.hpp"

namespace lolb::net {

using nn::Tensor;

const char* to_string(SkipMode m) { return m == SkipMode::FASC ? "fasc" : "concat"; }

SkipMode parse_skip_mode(const std::string& s) {
    if (s == "fasc" || s == "FASC") return SkipMode::FASC;
    if (s == "concat" || s == "CONCAT") return SkipMode::CONCAT;
    throw ConfigError("unknown skip mode '" + s + "' (expected fasc or concat)");
}

void LEDNetConfig::validate() const {
    if (scales != 3) throw ConfigError("net.scales must be 3");
    if (base_channels < 4 || base_channels % 4 != 0) throw ConfigError("net.base_channels must be a positive multiple of 4");
    if (curve_n < 1) throw ConfigError("net.curve_n must be >= 1");
    if (fac_d < 1 || fac_d % 2 == 0) throw ConfigError("net.fac_d must be odd");
    if (lambda_per < 0 || lambda_en < 0 || lambda_deb < 0) throw ConfigError("loss weights must be non-negative");
}

std::string LEDNetConfig::architecture_key() const {
    std::ostringstream os;
    os << "base=" << base_channels << ";scales=" << scales << ";n=" << curve_n << ";d=" << fac_d
       << ";ppm=" << use_ppm << ";curve=" << use_curve_nlu << ";skip=" << to_string(skip_mode);
    return os.str();
}

std::uint64_t LEDNetConfig::architecture_hash() const { return fnv1a(architecture_key()); }

void check_input_shape(int h, int w) {
    if (h % 8 != 0 || w % 8 != 0) {
        throw ShapeError("network input " + std::to_string(h) + "x" + std::to_string(w) + " must be divisible by 8");
    }
    if (h < 8 || w < 8) throw ShapeError("network input must be at least 8x8");
}

template <typename T>
LEDNet<T>::LEDNet(const LEDNetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int c0 = cfg_.base_channels;
    conv_in_ = nn::Conv2d<T>(params_, "conv_in", 3, c0, 3);
    int prev = c0;
    for (int s = 0; s < 3; ++s) {
        const int w = cfg_.width(s + 1);
        const std::string name = "enc" + std::to_string(s + 1);
        EncoderScale& e = enc_[std::size_t(s)];
        e.res = nn::ResidualBlock<T>(params_, name + ".res", prev);
        e.down = nn::ResidualDown<T>(params_, name + ".down", prev, w);
        if (cfg_.use_ppm) e.ppm = std::make_unique<nn::PyramidPooling<T>>(params_, name + ".ppm", w);
        if (cfg_.use_curve_nlu) e.curve = std::make_unique<nn::CurveNLU<T>>(params_, name + ".curve", w, cfg_.curve_n);
        prev = w;
    }
    enhance_head_ = nn::Conv2d<T>(params_, "enhance_head", cfg_.width(3), 3, 3, {}, nn::Init::LecunUniform);
    for (int s = 2; s >= 0; --s) {
        const int w = cfg_.width(s + 1);
        const int below = s == 0 ? c0 : cfg_.width(s);
        const std::string name = "dec" + std::to_string(s + 1);
        DecoderScale& d = dec_[std::size_t(s)];
        if (cfg_.skip_mode == SkipMode::FASC) {
            d.fasc = std::make_unique<nn::FilterAdaptiveSkip<T>>(params_, name + ".fasc", w, cfg_.fac_d);
        } else {
            d.concat = std::make_unique<nn::ConcatSkip<T>>(params_, name + ".concat", w);
        }
        d.res1 = nn::ResidualBlock<T>(params_, name + ".res1", w);
        d.res2 = nn::ResidualBlock<T>(params_, name + ".res2", w);
        d.up = nn::ResidualUp<T>(params_, name + ".up", w, below);
    }
    conv_out_ = nn::Conv2d<T>(params_, "conv_out", c0, 3, 3, {}, nn::Init::LecunUniform);
}

template <typename T>
ForwardTrace<T> LEDNet<T>::forward(const Tensor<T>& x) {
    x.require_rank(3, "LEDNet input");
    if (x.c() != 3) throw ShapeError("LEDNet expects a 3-channel input, got " + x.shape_string());
    check_input_shape(x.h(), x.w());

    ForwardTrace<T> trace;
    Tensor<T> f = conv_in_.forward(x);
    for (std::size_t s = 0; s < 3; ++s) {
        EncoderScale& e = enc_[s];
        f = e.down.forward(e.res.forward(f));
        if (e.ppm) f = e.ppm->forward(f);
        if (e.curve) {
            f = e.curve->forward(f);
            trace.curve_params[s] = e.curve->last_params();
        }
        trace.encoder_features[s] = f;
    }
    trace.intermediate = enhance_head_.forward(trace.encoder_features[2]);

    Tensor<T> d = trace.encoder_features[2];
    for (int s = 2; s >= 0; --s) {
        DecoderScale& dd = dec_[std::size_t(s)];
        const Tensor<T>& skip = trace.encoder_features[std::size_t(s)];
        d = dd.fasc ? dd.fasc->forward(d, skip) : dd.concat->forward(d, skip);
        d = dd.up.forward(dd.res2.forward(dd.res1.forward(d)));
    }
    trace.output = conv_out_.forward(d);
    return trace;
}

template <typename T>
void LEDNet<T>::backward(const Tensor<T>& grad_output, const Tensor<T>& grad_intermediate) {
    std::array<Tensor<T>, 3> enc_grad;
    Tensor<T> g = conv_out_.backward(grad_output);
    for (int s = 0; s < 3; ++s) {
        DecoderScale& dd = dec_[std::size_t(s)];
        g = dd.res1.backward(dd.res2.backward(dd.up.backward(g)));
        auto sg = dd.fasc ? dd.fasc->backward(g) : dd.concat->backward(g);
        enc_grad[std::size_t(s)] = std::move(sg.encoder);
        g = std::move(sg.decoder);
    }
    // The coarsest decoder input is the encoder output itself.
    enc_grad[2] += g;
    enc_grad[2] += enhance_head_.backward(grad_intermediate);

    Tensor<T> up;
    for (int s = 2; s >= 0; --s) {
        EncoderScale& e = enc_[std::size_t(s)];
        Tensor<T> ge = std::move(enc_grad[std::size_t(s)]);
        if (!up.empty()) ge += up;
        if (e.curve) ge = e.curve->backward(ge);
        if (e.ppm) ge = e.ppm->backward(ge);
        up = e.res.backward(e.down.backward(ge));
    }
    conv_in_.backward(up);
}

template class LEDNet<float>;
template class LEDNet<double>;

}  // namespace lolb::net
