#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lolb/nn/tensor.hpp"

namespace lolb::nn {

struct GradReport {
    std::string op;
    double max_rel_error = 0.0;
    std::vector<std::pair<std::string, double>> per_input;  // max relative error per input
    std::size_t checked = 0;                                 // number of perturbed entries
    std::size_t rechecked = 0;                               // entries that needed a fallback step
    double tolerance = 1e-4;
    bool pass = false;
};

/// A differentiable op over double tensors. backward receives the inputs and
/// the upstream gradient of the output and returns one gradient per input.
struct DiffOp {
    std::string name;
    std::vector<std::string> input_names;
    std::function<TensorD(const std::vector<TensorD>&)> forward;
    std::function<std::vector<TensorD>(const std::vector<TensorD>&, const TensorD&)> backward;
};

struct FiniteDiffOptions {
    double eps = 1e-6;
    double tol = 1e-4;
    std::uint64_t seed = 0;           // draws the projection weights and sampled entries
    std::size_t max_entries = 0;      // per input; 0 checks every entry
    /// Steps retried for an entry whose error at `eps` exceeds tol; the entry
    /// keeps its smallest error. A wrong gradient disagrees at every step, while
    /// a ReLU/L1 kink or round-off on a tiny gradient only spoils some of them.
    std::vector<double> fallback_eps;
};

/// Relative error |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares the analytic backward pass against central differences of the
/// scalar L = sum(R * forward(inputs)) for a fixed random projection R.
GradReport finite_diff_check(const DiffOp& op, const std::vector<TensorD>& inputs, const FiniteDiffOptions& opt = {});

}  // namespace lolb::nn
