#pragma once

#include <array>
#include <string>

#include "lolb/nn/kernels.hpp"
#include "lolb/nn/params.hpp"

// Stateful wrappers around the kernels. forward() caches what backward()
// needs; backward() accumulates into the owning ParamStore's gradients and
// returns the gradient with respect to the layer input.

namespace lolb::nn {

template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(ParamStore<T>& store, const std::string& name, int cin, int cout, int k, ConvSpec spec = {},
           Init weight_init = Init::HeUniform, Init bias_init = Init::Zero, int fac_d = 0);

    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

    Param<T>& weights() { return *w_; }
    Param<T>& bias() { return *b_; }

private:
    Param<T>* w_ = nullptr;
    Param<T>* b_ = nullptr;
    ConvSpec spec_;
    Tensor<T> x_;
};

/// x + conv(relu(conv(x)))
template <typename T>
class ResidualBlock {
public:
    ResidualBlock() = default;
    ResidualBlock(ParamStore<T>& store, const std::string& name, int channels);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

private:
    Conv2d<T> conv1_, conv2_;
    Tensor<T> pre_;
};

/// conv3x3/2 -> relu -> conv3x3, plus a strided 1x1 projection of the input. Halves H and W.
template <typename T>
class ResidualDown {
public:
    ResidualDown() = default;
    ResidualDown(ParamStore<T>& store, const std::string& name, int cin, int cout);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

private:
    Conv2d<T> conv1_, conv2_, skip_;
    Tensor<T> pre_;
};

/// Bilinear x2 upsample, then conv3x3 -> relu -> conv3x3 plus a 1x1 projection.
template <typename T>
class ResidualUp {
public:
    ResidualUp() = default;
    ResidualUp(ParamStore<T>& store, const std::string& name, int cin, int cout);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

private:
    Conv2d<T> conv1_, conv2_, skip_;
    std::vector<int> in_dims_;
    Tensor<T> pre_;
};

/// Three 3x3 convolutions (ReLU between) and a sigmoid: features -> n curve parameters in (0,1).
template <typename T>
class CurveEstimator {
public:
    CurveEstimator() = default;
    CurveEstimator(ParamStore<T>& store, const std::string& name, int channels, int n);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

private:
    Conv2d<T> conv1_, conv2_, conv3_;
    Tensor<T> pre1_, pre2_, out_;
};

/// Curve estimation followed by the iterated curve on the same features.
template <typename T>
class CurveNLU {
public:
    CurveNLU() = default;
    CurveNLU(ParamStore<T>& store, const std::string& name, int channels, int n);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);
    /// Curve parameters of the most recent forward pass.
    const Tensor<T>& last_params() const { return params_; }
    int order() const { return n_; }

private:
    CurveEstimator<T> estimator_;
    int n_ = 3;
    Tensor<T> x_, params_;
};

/// Pyramid pooling: mean pools at 1, 2, 3 and 6 bins, 1x1 conv to C/4 each,
/// bilinear upsample, concatenate with the input and fuse with a 3x3 conv to C.
template <typename T>
class PyramidPooling {
public:
    static constexpr std::array<int, 4> kBins{1, 2, 3, 6};

    PyramidPooling() = default;
    PyramidPooling(ParamStore<T>& store, const std::string& name, int channels);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);

private:
    std::array<Conv2d<T>, 4> reduce_;
    Conv2d<T> fuse_;
    int channels_ = 0;
    std::vector<int> in_dims_;
};

/// Predicts per-pixel FAC filters (C*d*d channels) from encoder features:
/// three 3x3 convs with ReLU, then a 1x1 expansion. The expansion bias starts
/// as the identity filter.
template <typename T>
class FilterHead {
public:
    FilterHead() = default;
    FilterHead(ParamStore<T>& store, const std::string& name, int channels, int d);
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& gy);
    int kernel_size() const { return d_; }

private:
    Conv2d<T> conv1_, conv2_, conv3_, expand_;
    Tensor<T> pre1_, pre2_, pre3_;
    int d_ = 5;
};

/// Filter-adaptive skip connection: transforms decoder features with filters
/// predicted from the matching encoder features.
template <typename T>
class FilterAdaptiveSkip {
public:
    FilterAdaptiveSkip() = default;
    FilterAdaptiveSkip(ParamStore<T>& store, const std::string& name, int channels, int d);
    Tensor<T> forward(const Tensor<T>& decoder, const Tensor<T>& encoder);

    struct Grads {
        Tensor<T> decoder;
        Tensor<T> encoder;
    };
    Grads backward(const Tensor<T>& gy);

private:
    FilterHead<T> head_;
    Tensor<T> decoder_, filters_;
};

/// Concatenation skip: 1x1 conv over [decoder, encoder] back to C channels.
template <typename T>
class ConcatSkip {
public:
    ConcatSkip() = default;
    ConcatSkip(ParamStore<T>& store, const std::string& name, int channels);
    Tensor<T> forward(const Tensor<T>& decoder, const Tensor<T>& encoder);
    typename FilterAdaptiveSkip<T>::Grads backward(const Tensor<T>& gy);

private:
    Conv2d<T> fuse_;
    int channels_ = 0;
};

}  // namespace lolb::nn
