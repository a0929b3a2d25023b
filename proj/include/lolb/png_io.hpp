#pragma once

#include <filesystem>

#include "lolb/image.hpp"

namespace lolb {

/// Reads an 8-bit PNG as an SRGB image. Grey images load with one channel;
/// RGBA and grey+alpha drop the alpha channel.
ImageF load_image(const std::filesystem::path& path);

/// Writes an SRGB image as an 8-bit PNG (values rounded to nearest of 255 levels).
void save_image(const std::filesystem::path& path, const ImageF& img);

}  // namespace lolb
