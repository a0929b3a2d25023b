#include "lolb/net/gradsuite.hpp"

#include <fnmatch.h>

#include <chrono>
#include <memory>
#include <set>

#include "lolb/net/lednet.hpp"
#include "lolb/net/loss.hpp"
#include "lolb/nn/kernels.hpp"
#include "lolb/nn/layers.hpp"
#include "lolb/rng.hpp"

namespace lolb::net {

using nn::DiffOp;
using nn::FiniteDiffOptions;
using nn::GradReport;
using nn::ParamStore;
using nn::TensorD;

namespace {

TensorD random_tensor(Rng& rng, std::vector<int> dims, double lo = -1.0, double hi = 1.0) {
    TensorD t(std::move(dims));
    for (auto& v : t.data()) v = uniform(rng, lo, hi);
    return t;
}

// Primitive kernels use eps = 1e-6. Composite layers sum enough terms that
// round-off swamps tiny gradients at that step, so they use 1e-5.
constexpr double kLayerEps = 1e-5;

FiniteDiffOptions options(std::uint64_t seed, double tol, std::size_t max_entries = 64, double eps = 1e-6) {
    FiniteDiffOptions o;
    o.eps = eps;
    o.seed = derive_seed(seed, "projection");
    o.tol = tol;
    o.max_entries = max_entries;
    return o;
}

void load_values(ParamStore<double>& store, const std::vector<TensorD>& in, std::size_t first) {
    std::size_t k = first;
    for (auto& p : store) p.value = in[k++];
}

// Wraps a stateful layer with `Arity` tensor inputs as a DiffOp whose inputs are
// the data tensors followed by every parameter. `make` registers the layer's
// parameters into a fresh store.
template <typename Layer, int Arity, typename Make>
GradReport check_layer(const std::string& name, Make make, std::vector<TensorD> data, std::uint64_t seed, double tol) {
    ParamStore<double> init;
    make(init);
    init.initialize(derive_seed(seed, "params"));
    // Perturb the initial values so zero-initialised biases are exercised off their init point.
    Rng rng(derive_seed(seed, "jitter"));
    std::vector<std::string> names = Arity == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"a", "b"};
    std::vector<TensorD> inputs = std::move(data);
    for (auto& p : init) {
        for (auto& v : p.value.data()) v += uniform(rng, -0.05, 0.05);
        inputs.push_back(p.value);
        names.push_back(p.name);
    }

    DiffOp op;
    op.name = name;
    op.input_names = names;
    op.forward = [make](const std::vector<TensorD>& in) {
        ParamStore<double> store;
        Layer layer = make(store);
        load_values(store, in, Arity);
        if constexpr (Arity == 1) {
            return layer.forward(in[0]);
        } else {
            return layer.forward(in[0], in[1]);
        }
    };
    op.backward = [make](const std::vector<TensorD>& in, const TensorD& gy) {
        ParamStore<double> store;
        Layer layer = make(store);
        load_values(store, in, Arity);
        std::vector<TensorD> grads;
        if constexpr (Arity == 1) {
            layer.forward(in[0]);
            grads.push_back(layer.backward(gy));
        } else {
            layer.forward(in[0], in[1]);
            auto g = layer.backward(gy);
            grads.push_back(std::move(g.decoder));
            grads.push_back(std::move(g.encoder));
        }
        for (auto& p : store) grads.push_back(p.grad);
        return grads;
    };
    return nn::finite_diff_check(op, inputs, options(seed, tol, 64, kLayerEps));
}

GradReport check_conv(std::uint64_t seed, nn::ConvSpec spec, int h, int w, int cin, int cout, int k, double tol,
                      double corrupt = 1.0) {
    Rng rng(seed);
    DiffOp op;
    op.name = "conv2d";
    op.input_names = {"x", "weights", "bias"};
    op.forward = [spec](const std::vector<TensorD>& in) { return nn::conv2d_forward(in[0], in[1], in[2], spec); };
    op.backward = [spec, corrupt](const std::vector<TensorD>& in, const TensorD& gy) {
        auto g = nn::conv2d_backward(in[0], in[1], gy, spec);
        if (corrupt != 1.0) {
            for (auto& v : g.weights.data()) v *= corrupt;
        }
        return std::vector<TensorD>{g.x, g.weights, g.bias};
    };
    std::vector<TensorD> in{random_tensor(rng, {h, w, cin}), random_tensor(rng, {cout, k, k, cin}),
                            random_tensor(rng, {cout})};
    return nn::finite_diff_check(op, in, options(seed, tol));
}

GradReport check_curve_nlu(std::uint64_t seed, double tol) {
    Rng rng(seed);
    const int n = 3;
    DiffOp op;
    op.name = "curve_nlu";
    op.input_names = {"features", "curve_params"};
    op.forward = [n](const std::vector<TensorD>& in) { return nn::curve_nlu_forward(in[0], in[1], n); };
    op.backward = [n](const std::vector<TensorD>& in, const TensorD& gy) {
        auto g = nn::curve_nlu_backward(in[0], in[1], n, gy);
        return std::vector<TensorD>{g.features, g.curve_params};
    };
    // Features straddle the clamp range so both branches are exercised.
    std::vector<TensorD> in{random_tensor(rng, {6, 6, 3}, -0.3, 1.3), random_tensor(rng, {6, 6, n}, 0.01, 0.99)};
    return nn::finite_diff_check(op, in, options(seed, tol, 0));
}

GradReport check_fac(std::uint64_t seed, double tol) {
    Rng rng(seed);
    const int d = 3, c = 2;
    DiffOp op;
    op.name = "fac";
    op.input_names = {"features", "filters"};
    op.forward = [d](const std::vector<TensorD>& in) { return nn::fac_forward(in[0], in[1], d); };
    op.backward = [d](const std::vector<TensorD>& in, const TensorD& gy) {
        auto g = nn::fac_backward(in[0], in[1], d, gy);
        return std::vector<TensorD>{g.features, g.filters};
    };
    std::vector<TensorD> in{random_tensor(rng, {6, 6, c}), random_tensor(rng, {6, 6, c * d * d})};
    return nn::finite_diff_check(op, in, options(seed, tol, 0));
}

GradReport check_pool(std::uint64_t seed, double tol) {
    Rng rng(seed);
    const int bins = 3;
    DiffOp op;
    op.name = "adaptive_pool";
    op.input_names = {"x"};
    op.forward = [bins](const std::vector<TensorD>& in) { return nn::adaptive_avg_pool_forward(in[0], bins); };
    op.backward = [bins](const std::vector<TensorD>& in, const TensorD& gy) {
        return std::vector<TensorD>{nn::adaptive_avg_pool_backward(in[0].dims(), bins, gy)};
    };
    return nn::finite_diff_check(op, {random_tensor(rng, {7, 5, 2})}, options(seed, tol, 0));
}

GradReport check_resize(std::uint64_t seed, double tol) {
    Rng rng(seed);
    DiffOp op;
    op.name = "resize";
    op.input_names = {"x"};
    op.forward = [](const std::vector<TensorD>& in) { return nn::resize_forward(in[0], 8, 3); };
    op.backward = [](const std::vector<TensorD>& in, const TensorD& gy) {
        return std::vector<TensorD>{nn::resize_backward(in[0].dims(), gy)};
    };
    return nn::finite_diff_check(op, {random_tensor(rng, {5, 7, 2})}, options(seed, tol, 0));
}

GradReport check_pointwise(std::uint64_t seed, double tol, bool sigmoid) {
    Rng rng(seed);
    DiffOp op;
    op.name = sigmoid ? "sigmoid" : "relu";
    op.input_names = {"x"};
    if (sigmoid) {
        op.forward = [](const std::vector<TensorD>& in) { return nn::sigmoid_forward(in[0]); };
        op.backward = [](const std::vector<TensorD>& in, const TensorD& gy) {
            return std::vector<TensorD>{nn::sigmoid_backward(nn::sigmoid_forward(in[0]), gy)};
        };
    } else {
        op.forward = [](const std::vector<TensorD>& in) { return nn::relu_forward(in[0]); };
        op.backward = [](const std::vector<TensorD>& in, const TensorD& gy) {
            return std::vector<TensorD>{nn::relu_backward(in[0], gy)};
        };
    }
    return nn::finite_diff_check(op, {random_tensor(rng, {4, 5, 3}, -3.0, 3.0)}, options(seed, tol, 0));
}

// Total training loss of a small LEDNet as a function of a 32-entry slice of
// its parameters, one entry from each of 32 randomly chosen parameter tensors.
GradReport check_lednet_slice(std::uint64_t seed, double tol) {
    LEDNetConfig cfg;
    cfg.base_channels = 8;
    auto net = std::make_shared<LEDNet<double>>(cfg);
    net->params().initialize(derive_seed(seed, "params"));

    Rng rng(seed);
    const TensorD x = random_tensor(rng, {16, 16, 3}, 0.0, 0.4);
    const TensorD y = random_tensor(rng, {16, 16, 3}, 0.0, 1.0);

    struct Entry {
        std::size_t param;
        std::size_t index;
    };
    std::vector<Entry> slice;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    TensorD values({32});
    while (slice.size() < 32) {
        const std::size_t p = std::size_t(rng() % net->params().size());
        const std::size_t idx = std::size_t(rng() % net->params()[p].value.size());
        if (!seen.insert({p, idx}).second) continue;
        values[slice.size()] = net->params()[p].value[idx] + uniform(rng, -0.05, 0.05);
        slice.push_back({p, idx});
    }

    auto apply = [net, slice](const TensorD& v) {
        for (std::size_t i = 0; i < slice.size(); ++i) net->params()[slice[i].param].value[slice[i].index] = v[i];
    };
    DiffOp op;
    op.name = "lednet/slice";
    op.input_names = {"param_slice"};
    op.forward = [net, apply, x, y](const std::vector<TensorD>& in) {
        apply(in[0]);
        const auto trace = net->forward(x);
        TensorD out({1});
        out[0] = compute_loss(trace, y, net->config()).parts.total;
        return out;
    };
    op.backward = [net, apply, slice, x, y](const std::vector<TensorD>& in, const TensorD& gy) {
        apply(in[0]);
        net->params().zero_grad();
        const auto trace = net->forward(x);
        const auto loss = compute_loss(trace, y, net->config());
        net->backward(loss.grad_output, loss.grad_intermediate);
        TensorD g({int(slice.size())});
        for (std::size_t i = 0; i < slice.size(); ++i) g[i] = gy[0] * net->params()[slice[i].param].grad[slice[i].index];
        return std::vector<TensorD>{g};
    };
    FiniteDiffOptions opt = options(seed, tol, 0);
    opt.fallback_eps = {1e-7, 1e-5, 1e-4};
    return nn::finite_diff_check(op, {values}, opt);
}

template <typename Layer, typename... Args>
auto maker(std::string name, Args... args) {
    return [name, args...](ParamStore<double>& s) { return Layer(s, name, args...); };
}

std::vector<GradCase> build_cases() {
    std::vector<GradCase> cases;
    auto add = [&](std::string name, double tol, std::function<GradReport(std::uint64_t, double)> fn,
                   bool negative = false) {
        GradCase c;
        c.name = name;
        c.tolerance = tol;
        c.negative_control = negative;
        c.run = [fn, tol, name](std::uint64_t seed) {
            GradReport r = fn(seed, tol);
            r.op = name;
            return r;
        };
        cases.push_back(std::move(c));
    };
    using nn::Padding;
    add("conv2d/zero", 1e-4, [](auto s, double t) { return check_conv(s, {1, Padding::Zero}, 7, 6, 3, 4, 3, t); });
    add("conv2d/reflect", 1e-4, [](auto s, double t) { return check_conv(s, {1, Padding::Reflect}, 7, 6, 3, 4, 3, t); });
    add("conv2d/stride2", 1e-4, [](auto s, double t) { return check_conv(s, {2, Padding::Zero}, 8, 7, 3, 4, 3, t); });
    add("conv2d/stride2_reflect", 1e-4,
        [](auto s, double t) { return check_conv(s, {2, Padding::Reflect}, 8, 7, 3, 4, 3, t); });
    add("conv2d/1x1", 1e-4, [](auto s, double t) { return check_conv(s, {1, Padding::Zero}, 5, 5, 4, 3, 1, t); });
    add("relu", 1e-4, [](auto s, double t) { return check_pointwise(s, t, false); });
    add("sigmoid", 1e-4, [](auto s, double t) { return check_pointwise(s, t, true); });
    add("adaptive_pool", 1e-4, [](auto s, double t) { return check_pool(s, t); });
    add("resize", 1e-4, [](auto s, double t) { return check_resize(s, t); });
    add("curve_nlu", 1e-4, [](auto s, double t) { return check_curve_nlu(s, t); });
    add("fac", 1e-4, [](auto s, double t) { return check_fac(s, t); });

    auto input = [](std::uint64_t s, std::vector<int> dims, double lo = -1.0, double hi = 1.0) {
        Rng rng(derive_seed(s, "input"));
        return random_tensor(rng, std::move(dims), lo, hi);
    };
    add("curve_estimator", 1e-4, [input](auto s, double t) {
        return check_layer<nn::CurveEstimator<double>, 1>("curve_estimator",
                                                           maker<nn::CurveEstimator<double>>("ce", 4, 3),
                                                           {input(s, {6, 6, 4})}, s, t);
    });
    add("curve_nlu_layer", 1e-4, [input](auto s, double t) {
        return check_layer<nn::CurveNLU<double>, 1>("curve_nlu_layer", maker<nn::CurveNLU<double>>("cn", 4, 3),
                                                     {input(s, {6, 6, 4}, -0.2, 1.2)}, s, t);
    });
    add("ppm", 1e-4, [input](auto s, double t) {
        return check_layer<nn::PyramidPooling<double>, 1>("ppm", maker<nn::PyramidPooling<double>>("ppm", 8),
                                                           {input(s, {12, 12, 8})}, s, t);
    });
    add("fasc_head", 1e-4, [input](auto s, double t) {
        return check_layer<nn::FilterHead<double>, 1>("fasc_head", maker<nn::FilterHead<double>>("head", 2, 3),
                                                       {input(s, {6, 6, 2})}, s, t);
    });
    add("fasc", 1e-4, [input](auto s, double t) {
        return check_layer<nn::FilterAdaptiveSkip<double>, 2>(
            "fasc", maker<nn::FilterAdaptiveSkip<double>>("fasc", 2, 3),
            {input(derive_seed(s, 1), {6, 6, 2}), input(derive_seed(s, 2), {6, 6, 2})}, s, t);
    });
    add("concat_skip", 1e-4, [input](auto s, double t) {
        return check_layer<nn::ConcatSkip<double>, 2>(
            "concat_skip", maker<nn::ConcatSkip<double>>("cat", 3),
            {input(derive_seed(s, 1), {5, 6, 3}), input(derive_seed(s, 2), {5, 6, 3})}, s, t);
    });
    add("residual_block", 1e-4, [input](auto s, double t) {
        return check_layer<nn::ResidualBlock<double>, 1>("residual_block", maker<nn::ResidualBlock<double>>("rb", 4),
                                                          {input(s, {6, 6, 4})}, s, t);
    });
    add("residual_down", 1e-4, [input](auto s, double t) {
        return check_layer<nn::ResidualDown<double>, 1>("residual_down", maker<nn::ResidualDown<double>>("rd", 3, 6),
                                                         {input(s, {8, 8, 3})}, s, t);
    });
    add("residual_up", 1e-4, [input](auto s, double t) {
        return check_layer<nn::ResidualUp<double>, 1>("residual_up", maker<nn::ResidualUp<double>>("ru", 6, 3),
                                                       {input(s, {4, 4, 6})}, s, t);
    });
    add("lednet/slice", 1e-3, [](auto s, double t) { return check_lednet_slice(s, t); });

    // Negative control: weight gradients scaled by 1.01 must be caught.
    add("negative/conv2d_corrupted", 1e-4,
        [](auto s, double t) { return check_conv(s, {1, Padding::Zero}, 6, 6, 2, 3, 3, t, 1.01); }, true);
    return cases;
}

}  // namespace

const std::vector<GradCase>& gradient_cases() {
    static const std::vector<GradCase> cases = build_cases();
    return cases;
}

std::vector<GradCaseResult> run_gradient_suite(const std::string& glob, const std::vector<std::uint64_t>& seeds,
                                               bool include_negative) {
    std::vector<GradCaseResult> results;
    for (const GradCase& c : gradient_cases()) {
        if (c.negative_control && !include_negative) continue;
        if (fnmatch(glob.c_str(), c.name.c_str(), 0) != 0) continue;
        GradCaseResult r;
        r.name = c.name;
        r.tolerance = c.tolerance;
        r.negative_control = c.negative_control;
        r.pass = true;
        const auto t0 = std::chrono::steady_clock::now();
        for (std::uint64_t seed : seeds) {
            r.runs.push_back(c.run(seed));
            r.max_rel_error = std::max(r.max_rel_error, r.runs.back().max_rel_error);
            r.pass = r.pass && r.runs.back().pass;
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace lolb::net
