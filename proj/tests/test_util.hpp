#pragma once

#include <filesystem>
#include <string>

#include "lolb/image.hpp"
#include "lolb/nn/tensor.hpp"
#include "lolb/rng.hpp"

namespace lolb::test {

// Fresh per-test scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::path(LOLB_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline ImageF random_image(std::uint64_t seed, int h, int w, int c = 3, double lo = 0.0, double hi = 1.0) {
    Rng rng(seed);
    ImageF img(h, w, c, Domain::SRGB);
    for (float& v : img.data()) v = static_cast<float>(uniform(rng, lo, hi));
    return img;
}

template <typename T>
nn::Tensor<T> random_tensor(Rng& rng, std::vector<int> dims, double lo = -1.0, double hi = 1.0) {
    nn::Tensor<T> t(std::move(dims));
    for (auto& v : t.data()) v = static_cast<T>(uniform(rng, lo, hi));
    return t;
}

}  // namespace lolb::test
