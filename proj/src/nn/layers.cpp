#include "lolb/nn/layers.hpp"

namespace lolb::nn {

template <typename T>
Conv2d<T>::Conv2d(ParamStore<T>& store, const std::string& name, int cin, int cout, int k, ConvSpec spec,
                  Init weight_init, Init bias_init, int fac_d)
    : spec_(spec) {
    w_ = &store.add(name + ".w", {cout, k, k, cin}, weight_init, k * k * cin);
    b_ = &store.add(name + ".b", {cout}, bias_init, k * k * cin, fac_d);
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
    x_ = x;
    return conv2d_forward(x, w_->value, b_->value, spec_);
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& gy) {
    ConvGrads<T> g = conv2d_backward(x_, w_->value, gy, spec_);
    w_->grad += g.weights;
    b_->grad += g.bias;
    return std::move(g.x);
}

template <typename T>
ResidualBlock<T>::ResidualBlock(ParamStore<T>& store, const std::string& name, int channels)
    : conv1_(store, name + ".conv1", channels, channels, 3),
      conv2_(store, name + ".conv2", channels, channels, 3, {}, Init::Zero) {}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x) {
    pre_ = conv1_.forward(x);
    Tensor<T> out = conv2_.forward(relu_forward(pre_));
    out += x;
    return out;
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& gy) {
    Tensor<T> g = conv1_.backward(relu_backward(pre_, conv2_.backward(gy)));
    g += gy;
    return g;
}

template <typename T>
ResidualDown<T>::ResidualDown(ParamStore<T>& store, const std::string& name, int cin, int cout)
    : conv1_(store, name + ".conv1", cin, cout, 3, {2, Padding::Zero}),
      conv2_(store, name + ".conv2", cout, cout, 3, {}, Init::Zero),
      skip_(store, name + ".skip", cin, cout, 1, {2, Padding::Zero}, Init::LecunUniform) {}

template <typename T>
Tensor<T> ResidualDown<T>::forward(const Tensor<T>& x) {
    pre_ = conv1_.forward(x);
    Tensor<T> out = conv2_.forward(relu_forward(pre_));
    out += skip_.forward(x);
    return out;
}

template <typename T>
Tensor<T> ResidualDown<T>::backward(const Tensor<T>& gy) {
    Tensor<T> g = conv1_.backward(relu_backward(pre_, conv2_.backward(gy)));
    g += skip_.backward(gy);
    return g;
}

template <typename T>
ResidualUp<T>::ResidualUp(ParamStore<T>& store, const std::string& name, int cin, int cout)
    : conv1_(store, name + ".conv1", cin, cout, 3),
      conv2_(store, name + ".conv2", cout, cout, 3, {}, Init::Zero),
      skip_(store, name + ".skip", cin, cout, 1, {}, Init::LecunUniform) {}

template <typename T>
Tensor<T> ResidualUp<T>::forward(const Tensor<T>& x) {
    x.require_rank(3, "residual upsample");
    in_dims_ = x.dims();
    const Tensor<T> up = resize_forward(x, 2 * x.h(), 2 * x.w());
    pre_ = conv1_.forward(up);
    Tensor<T> out = conv2_.forward(relu_forward(pre_));
    out += skip_.forward(up);
    return out;
}

template <typename T>
Tensor<T> ResidualUp<T>::backward(const Tensor<T>& gy) {
    Tensor<T> g = conv1_.backward(relu_backward(pre_, conv2_.backward(gy)));
    g += skip_.backward(gy);
    return resize_backward(in_dims_, g);
}

template <typename T>
CurveEstimator<T>::CurveEstimator(ParamStore<T>& store, const std::string& name, int channels, int n)
    : conv1_(store, name + ".conv1", channels, channels, 3),
      conv2_(store, name + ".conv2", channels, channels, 3),
      conv3_(store, name + ".conv3", channels, n, 3, {}, Init::LecunUniform) {}

template <typename T>
Tensor<T> CurveEstimator<T>::forward(const Tensor<T>& x) {
    pre1_ = conv1_.forward(x);
    pre2_ = conv2_.forward(relu_forward(pre1_));
    out_ = sigmoid_forward(conv3_.forward(relu_forward(pre2_)));
    return out_;
}

template <typename T>
Tensor<T> CurveEstimator<T>::backward(const Tensor<T>& gy) {
    Tensor<T> g = conv3_.backward(sigmoid_backward(out_, gy));
    g = conv2_.backward(relu_backward(pre2_, g));
    return conv1_.backward(relu_backward(pre1_, g));
}

template <typename T>
CurveNLU<T>::CurveNLU(ParamStore<T>& store, const std::string& name, int channels, int n)
    : estimator_(store, name + ".estimator", channels, n), n_(n) {}

template <typename T>
Tensor<T> CurveNLU<T>::forward(const Tensor<T>& x) {
    x_ = x;
    params_ = estimator_.forward(x);
    return curve_nlu_forward(x, params_, n_);
}

template <typename T>
Tensor<T> CurveNLU<T>::backward(const Tensor<T>& gy) {
    CurveGrads<T> g = curve_nlu_backward(x_, params_, n_, gy);
    Tensor<T> gx = estimator_.backward(g.curve_params);
    gx += g.features;
    return gx;
}

template <typename T>
PyramidPooling<T>::PyramidPooling(ParamStore<T>& store, const std::string& name, int channels)
    : fuse_(store, name + ".fuse", channels + 4 * (channels / 4), channels, 3, {}, Init::LecunUniform),
      channels_(channels) {
    if (channels < 4 || channels % 4 != 0) throw ConfigError("pyramid pooling needs a channel count divisible by 4");
    for (std::size_t i = 0; i < kBins.size(); ++i) {
        reduce_[i] = Conv2d<T>(store, name + ".bin" + std::to_string(kBins[i]), channels, channels / 4, 1, {},
                               Init::LecunUniform);
    }
}

template <typename T>
Tensor<T> PyramidPooling<T>::forward(const Tensor<T>& x) {
    x.require_rank(3, "pyramid pooling");
    if (x.c() != channels_) throw ShapeError("pyramid pooling channel mismatch");
    in_dims_ = x.dims();
    std::array<Tensor<T>, 4> branches;
    for (std::size_t i = 0; i < kBins.size(); ++i) {
        branches[i] = resize_forward(reduce_[i].forward(adaptive_avg_pool_forward(x, kBins[i])), x.h(), x.w());
    }
    const Tensor<T> cat = concat_channels<T>({&x, &branches[0], &branches[1], &branches[2], &branches[3]});
    return fuse_.forward(cat);
}

template <typename T>
Tensor<T> PyramidPooling<T>::backward(const Tensor<T>& gy) {
    const Tensor<T> gcat = fuse_.backward(gy);
    const int q = channels_ / 4;
    std::vector<Tensor<T>> parts = split_channels(gcat, {channels_, q, q, q, q});
    Tensor<T> gx = std::move(parts[0]);
    for (std::size_t i = 0; i < kBins.size(); ++i) {
        const int b = kBins[i];
        Tensor<T> g = resize_backward({b, b, q}, parts[i + 1]);
        g = reduce_[i].backward(g);
        gx += adaptive_avg_pool_backward(in_dims_, b, g);
    }
    return gx;
}

template <typename T>
FilterHead<T>::FilterHead(ParamStore<T>& store, const std::string& name, int channels, int d)
    : conv1_(store, name + ".conv1", channels, channels, 3),
      conv2_(store, name + ".conv2", channels, channels, 3),
      conv3_(store, name + ".conv3", channels, channels, 3),
      expand_(store, name + ".expand", channels, channels * d * d, 1, {}, Init::Zero, Init::FacIdentity, d),
      d_(d) {
    if (d < 1 || d % 2 == 0) throw ConfigError("FAC kernel size must be odd");
}

template <typename T>
Tensor<T> FilterHead<T>::forward(const Tensor<T>& x) {
    pre1_ = conv1_.forward(x);
    pre2_ = conv2_.forward(relu_forward(pre1_));
    pre3_ = conv3_.forward(relu_forward(pre2_));
    return expand_.forward(relu_forward(pre3_));
}

template <typename T>
Tensor<T> FilterHead<T>::backward(const Tensor<T>& gy) {
    Tensor<T> g = relu_backward(pre3_, expand_.backward(gy));
    g = relu_backward(pre2_, conv3_.backward(g));
    g = relu_backward(pre1_, conv2_.backward(g));
    return conv1_.backward(g);
}

template <typename T>
FilterAdaptiveSkip<T>::FilterAdaptiveSkip(ParamStore<T>& store, const std::string& name, int channels, int d)
    : head_(store, name + ".head", channels, d) {}

template <typename T>
Tensor<T> FilterAdaptiveSkip<T>::forward(const Tensor<T>& decoder, const Tensor<T>& encoder) {
    decoder_ = decoder;
    filters_ = head_.forward(encoder);
    return fac_forward(decoder, filters_, head_.kernel_size());
}

template <typename T>
typename FilterAdaptiveSkip<T>::Grads FilterAdaptiveSkip<T>::backward(const Tensor<T>& gy) {
    FacGrads<T> g = fac_backward(decoder_, filters_, head_.kernel_size(), gy);
    return {std::move(g.features), head_.backward(g.filters)};
}

template <typename T>
ConcatSkip<T>::ConcatSkip(ParamStore<T>& store, const std::string& name, int channels)
    : fuse_(store, name + ".fuse", 2 * channels, channels, 1, {}, Init::LecunUniform), channels_(channels) {}

template <typename T>
Tensor<T> ConcatSkip<T>::forward(const Tensor<T>& decoder, const Tensor<T>& encoder) {
    return fuse_.forward(concat_channels<T>({&decoder, &encoder}));
}

template <typename T>
typename FilterAdaptiveSkip<T>::Grads ConcatSkip<T>::backward(const Tensor<T>& gy) {
    std::vector<Tensor<T>> parts = split_channels(fuse_.backward(gy), {channels_, channels_});
    return {std::move(parts[0]), std::move(parts[1])};
}

#define LOLB_INSTANTIATE_LAYERS(T)          \
    template class Conv2d<T>;               \
    template class ResidualBlock<T>;        \
    template class ResidualDown<T>;         \
    template class ResidualUp<T>;           \
    template class CurveEstimator<T>;       \
    template class CurveNLU<T>;             \
    template class PyramidPooling<T>;       \
    template class FilterHead<T>;           \
    template class FilterAdaptiveSkip<T>;   \
    template class ConcatSkip<T>;

LOLB_INSTANTIATE_LAYERS(float)
LOLB_INSTANTIATE_LAYERS(double)

}  // namespace lolb::nn
