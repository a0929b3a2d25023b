#pragma once

#include "lolb/net/lednet.hpp"

namespace lolb::net {

/// Feature-space distance hook for the perceptual terms. The default
/// implementation contributes nothing.
template <typename T>
class PerceptualLoss {
public:
    virtual ~PerceptualLoss() = default;
    virtual double value(const nn::Tensor<T>& pred, const nn::Tensor<T>& target) const = 0;
    virtual nn::Tensor<T> grad(const nn::Tensor<T>& pred, const nn::Tensor<T>& target) const = 0;
};

template <typename T>
class ZeroPerceptualLoss final : public PerceptualLoss<T> {
public:
    double value(const nn::Tensor<T>&, const nn::Tensor<T>&) const override { return 0.0; }
    nn::Tensor<T> grad(const nn::Tensor<T>& pred, const nn::Tensor<T>&) const override { return nn::Tensor<T>(pred.dims()); }
};

struct LossParts {
    double enh_l1 = 0.0;
    double enh_perceptual = 0.0;
    double deb_l1 = 0.0;
    double deb_perceptual = 0.0;
    double l_en = 0.0;    // enh_l1 + lambda_per * enh_perceptual (0 when the term is disabled)
    double l_deb = 0.0;   // deb_l1 + lambda_per * deb_perceptual
    double total = 0.0;   // lambda_en * l_en + lambda_deb * l_deb
};

template <typename T>
struct LossResult {
    LossParts parts;
    nn::Tensor<T> grad_output;
    nn::Tensor<T> grad_intermediate;
};

/// Ground truth at the intermediate scale: bilinear 8x downsample.
template <typename T>
nn::Tensor<T> downsample8(const nn::Tensor<T>& y);

template <typename T>
LossResult<T> compute_loss(const ForwardTrace<T>& trace, const nn::Tensor<T>& target, const LEDNetConfig& cfg,
                           const PerceptualLoss<T>* perceptual = nullptr);

}  // namespace lolb::net
