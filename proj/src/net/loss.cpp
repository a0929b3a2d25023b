#include "lolb/net/loss.hpp"

#include "lolb/nn/kernels.hpp"

namespace lolb::net {

using nn::Tensor;

template <typename T>
Tensor<T> downsample8(const Tensor<T>& y) {
    y.require_rank(3, "downsample8");
    if (y.h() % 8 != 0 || y.w() % 8 != 0) throw ShapeError("downsample8 needs dimensions divisible by 8");
    return nn::resize_forward(y, y.h() / 8, y.w() / 8);
}

template <typename T>
LossResult<T> compute_loss(const ForwardTrace<T>& trace, const Tensor<T>& target, const LEDNetConfig& cfg,
                           const PerceptualLoss<T>* perceptual) {
    nn::require_same_shape(trace.output, target, "loss target");
    const ZeroPerceptualLoss<T> none;
    const PerceptualLoss<T>& per = perceptual ? *perceptual : none;

    LossResult<T> r;
    LossParts& p = r.parts;
    p.deb_l1 = nn::l1_loss(trace.output, target);
    p.deb_perceptual = per.value(trace.output, target);
    p.l_deb = p.deb_l1 + cfg.lambda_per * p.deb_perceptual;
    r.grad_output = nn::l1_loss_grad(trace.output, target);
    {
        Tensor<T> gp = per.grad(trace.output, target);
        for (std::size_t i = 0; i < gp.size(); ++i) r.grad_output[i] += static_cast<T>(cfg.lambda_per * gp[i]);
    }
    for (auto& v : r.grad_output.data()) v = static_cast<T>(cfg.lambda_deb * v);

    r.grad_intermediate = Tensor<T>(trace.intermediate.dims());
    if (cfg.use_enh_loss) {
        const Tensor<T> small = downsample8(target);
        nn::require_same_shape(trace.intermediate, small, "intermediate target");
        p.enh_l1 = nn::l1_loss(trace.intermediate, small);
        p.enh_perceptual = per.value(trace.intermediate, small);
        p.l_en = p.enh_l1 + cfg.lambda_per * p.enh_perceptual;
        Tensor<T> g = nn::l1_loss_grad(trace.intermediate, small);
        const Tensor<T> gp = per.grad(trace.intermediate, small);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.grad_intermediate[i] = static_cast<T>(cfg.lambda_en * (g[i] + cfg.lambda_per * gp[i]));
        }
    }
    p.total = cfg.lambda_en * p.l_en + cfg.lambda_deb * p.l_deb;
    return r;
}

template Tensor<float> downsample8(const Tensor<float>&);
template Tensor<double> downsample8(const Tensor<double>&);
template LossResult<float> compute_loss(const ForwardTrace<float>&, const Tensor<float>&, const LEDNetConfig&,
                                        const PerceptualLoss<float>*);
template LossResult<double> compute_loss(const ForwardTrace<double>&, const Tensor<double>&, const LEDNetConfig&,
                                         const PerceptualLoss<double>*);

}  // namespace lolb::net
