#pragma once

#include <vector>

#include "lolb/nn/tensor.hpp"

// Forward/backward kernels for every network layer. All kernels are pure
// functions of their inputs, instantiated for float and double, and
// accumulate in double. Loops marked parallel write disjoint outputs with a
// fixed reduction order per element, so results are independent of the
// thread count.

namespace lolb::nn {

enum class Padding { Zero, Reflect };

struct ConvSpec {
    int stride = 1;
    Padding pad = Padding::Zero;
};

/// Output side length of a "same"-padded (K/2) convolution.
int conv_out_size(int in, int k, int stride);

/// x (H,W,Cin), weights (Cout,K,K,Cin) with odd K, bias (Cout) -> (H',W',Cout).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias, ConvSpec spec = {});

template <typename T>
struct ConvGrads {
    Tensor<T> x;
    Tensor<T> weights;
    Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& upstream, ConvSpec spec = {});

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);
/// Gradient of ReLU given the forward input.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& upstream);

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& x);
/// Gradient of the sigmoid given its forward output.
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& upstream);

/// Iterated quadratic curve with per-pixel parameters shared across channels:
/// C0 = clamp(F,0,1), C_i = A_i*C_{i-1}*(1-C_{i-1}) + C_{i-1}, i = 1..n.
/// F is (H,W,C), A is (H,W,n) with values in [0,1].
template <typename T>
Tensor<T> curve_nlu_forward(const Tensor<T>& features, const Tensor<T>& curve_params, int n);

template <typename T>
struct CurveGrads {
    Tensor<T> features;
    Tensor<T> curve_params;
};

/// Exact gradients; zero with respect to F where F was clamped.
template <typename T>
CurveGrads<T> curve_nlu_backward(const Tensor<T>& features, const Tensor<T>& curve_params, int n,
                                 const Tensor<T>& upstream);

/// Filter-adaptive convolution: out[p,c] = sum_{u,v} K[p, c*d*d + u*d + v] * D[p + (u,v) - d/2, c],
/// zero outside the map. D is (H,W,C), K is (H,W,C*d*d).
template <typename T>
Tensor<T> fac_forward(const Tensor<T>& features, const Tensor<T>& filters, int d);

template <typename T>
struct FacGrads {
    Tensor<T> features;
    Tensor<T> filters;
};

template <typename T>
FacGrads<T> fac_backward(const Tensor<T>& features, const Tensor<T>& filters, int d, const Tensor<T>& upstream);

/// Mean pooling to a bins x bins grid; cell i spans [floor(i*H/b), ceil((i+1)*H/b)).
template <typename T>
Tensor<T> adaptive_avg_pool_forward(const Tensor<T>& x, int bins);
template <typename T>
Tensor<T> adaptive_avg_pool_backward(const std::vector<int>& input_dims, int bins, const Tensor<T>& upstream);

/// Bilinear resize with half-pixel centres (source = (dst + 0.5) * in/out - 0.5,
/// clamped at the borders).
template <typename T>
Tensor<T> resize_forward(const Tensor<T>& x, int out_h, int out_w);
template <typename T>
Tensor<T> resize_backward(const std::vector<int>& input_dims, const Tensor<T>& upstream);

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts);
/// Splits the channel axis into pieces of the given widths.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<int>& widths);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Mean absolute difference and its gradient with respect to `pred`.
template <typename T>
double l1_loss(const Tensor<T>& pred, const Tensor<T>& target);
template <typename T>
Tensor<T> l1_loss_grad(const Tensor<T>& pred, const Tensor<T>& target);

namespace ref {
// Serial nested-loop versions of the hot kernels, kept as the reference for
// tests and the benchmark.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias, ConvSpec spec = {});
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& upstream, ConvSpec spec = {});
template <typename T>
Tensor<T> fac_forward(const Tensor<T>& features, const Tensor<T>& filters, int d);
template <typename T>
FacGrads<T> fac_backward(const Tensor<T>& features, const Tensor<T>& filters, int d, const Tensor<T>& upstream);
}  // namespace ref

}  // namespace lolb::nn
