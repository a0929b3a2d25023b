#include "lolb/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace lolb {

ImageF load_image(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);
    }
    const bool grey = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = grey ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const int channels = grey ? 1 : 3;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    ImageF out(static_cast<int>(image.height), static_cast<int>(image.width), channels, Domain::SRGB);
    auto px = out.data();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(buffer[i]) / 255.0f;
    return out;
}

void save_image(const std::filesystem::path& path, const ImageF& img) {
    if (img.domain() != Domain::SRGB) throw DomainError("save_image expects an SRGB image");
    img.check_range(1e-4f);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    auto px = img.data();
    std::vector<png_byte> buffer(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        buffer[i] = static_cast<png_byte>(std::lround(std::clamp(px[i], 0.0f, 1.0f) * 255.0f));
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

}  // namespace lolb
