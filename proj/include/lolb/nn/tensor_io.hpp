#pragma once

#include <filesystem>
#include <iosfwd>

#include "lolb/nn/tensor.hpp"

namespace lolb::nn {

// Binary layout: "TNSR", u32 rank, rank x u32 dims, then little-endian f32
// payload in row-major order (last dimension fastest).

void write_tensor(std::ostream& os, const TensorF& t);
TensorF read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const TensorF& t);
TensorF load_tensor(const std::filesystem::path& path);

}  // namespace lolb::nn
