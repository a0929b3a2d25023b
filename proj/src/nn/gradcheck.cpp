#include "lolb/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lolb/rng.hpp"

namespace lolb::nn {

double relative_error(double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

GradReport finite_diff_check(const DiffOp& op, const std::vector<TensorD>& inputs, const FiniteDiffOptions& opt) {
    GradReport report;
    report.op = op.name;
    report.tolerance = opt.tol;

    Rng rng(opt.seed);
    const TensorD out = op.forward(inputs);
    TensorD proj(out.dims());
    for (auto& v : proj.data()) v = uniform(rng, -1.0, 1.0);
    auto project = [&](const TensorD& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += proj[i] * y[i];
        return s;
    };

    const std::vector<TensorD> analytic = op.backward(inputs, proj);
    if (analytic.size() != inputs.size()) throw ShapeError(op.name + ": backward returned the wrong number of gradients");

    std::vector<TensorD> work = inputs;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        require_same_shape(analytic[k], inputs[k], "gradient");
        std::vector<std::size_t> entries(inputs[k].size());
        std::iota(entries.begin(), entries.end(), std::size_t(0));
        if (opt.max_entries && entries.size() > opt.max_entries) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(opt.max_entries);
            std::sort(entries.begin(), entries.end());
        }
        double worst = 0.0;
        auto central = [&](std::size_t e, double eps) {
            const double orig = work[k][e];
            work[k][e] = orig + eps;
            const double up = project(op.forward(work));
            work[k][e] = orig - eps;
            const double down = project(op.forward(work));
            work[k][e] = orig;
            return (up - down) / (2.0 * eps);
        };
        for (std::size_t e : entries) {
            double err = relative_error(analytic[k][e], central(e, opt.eps));
            if (err >= opt.tol && !opt.fallback_eps.empty()) {
                ++report.rechecked;
                for (double eps : opt.fallback_eps) err = std::min(err, relative_error(analytic[k][e], central(e, eps)));
            }
            worst = std::max(worst, err);
        }
        report.checked += entries.size();
        const std::string label = k < op.input_names.size() ? op.input_names[k] : "input" + std::to_string(k);
        report.per_input.emplace_back(label, worst);
        report.max_rel_error = std::max(report.max_rel_error, worst);
    }
    report.pass = report.max_rel_error < opt.tol && std::isfinite(report.max_rel_error);
    return report;
}

}  // namespace lolb::nn
