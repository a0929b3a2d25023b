#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lolb/nn/gradcheck.hpp"

namespace lolb::net {

/// One registered finite-difference fixture. run() builds the op and its
/// random inputs from `seed` and returns the check report.
struct GradCase {
    std::string name;
    double tolerance = 1e-4;
    bool negative_control = false;  // deliberately broken backward; expected to fail
    std::function<nn::GradReport(std::uint64_t seed)> run;
};

const std::vector<GradCase>& gradient_cases();

struct GradCaseResult {
    std::string name;
    std::vector<nn::GradReport> runs;  // one per seed
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    bool negative_control = false;
    bool pass = false;
};

/// Runs every case whose name matches `glob` (fnmatch syntax) once per seed.
/// Negative controls only run when `include_negative` is set.
std::vector<GradCaseResult> run_gradient_suite(const std::string& glob, const std::vector<std::uint64_t>& seeds,
                                               bool include_negative = false);

inline const std::vector<std::uint64_t> kDefaultGradSeeds{11, 23, 47};

}  // namespace lolb::net
