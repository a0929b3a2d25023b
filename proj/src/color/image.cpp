#include "lolb/image.hpp"

#include <algorithm>
#include <cstdio>

namespace lolb {

const char* to_string(Domain d) {
    return d == Domain::SRGB ? "SRGB" : "LINEAR";
}

ImageF::ImageF(int height, int width, int channels, Domain domain, float fill)
    : h_(height), w_(width), c_(channels), domain_(domain) {
    if (height < 1 || width < 1) throw ShapeError("image dimensions must be >= 1");
    if (channels != 1 && channels != 3) throw ShapeError("image channel count must be 1 or 3");
    data_.assign(std::size_t(h_) * std::size_t(w_) * std::size_t(c_), fill);
}

std::string ImageF::shape_string() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%dx%dx%d", h_, w_, c_);
    return buf;
}

void ImageF::check_range(float slack) const {
    if (domain_ != Domain::SRGB) return;
    for (float v : data_) {
        if (!(v >= -slack && v <= 1.0f + slack)) {
            throw ValidationError("sRGB image value " + std::to_string(v) + " outside [0,1]");
        }
    }
}

std::size_t SaturationMask::count() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), static_cast<unsigned char>(1)));
}

SaturationMask SaturationMask::empty_like(const ImageF& img) {
    SaturationMask m;
    m.height = img.height();
    m.width = img.width();
    m.data.assign(img.pixel_count(), 0);
    return m;
}

void FrameSequence::validate() const {
    if (frames.empty()) throw InsufficientFramesError("frame sequence is empty");
    const ImageF& first = frames.front();
    for (const ImageF& f : frames) {
        if (!f.same_shape(first)) {
            throw ShapeError("frame shapes differ: " + f.shape_string() + " vs " + first.shape_string());
        }
        if (f.domain() != first.domain()) throw DomainError("frames carry mixed colour domains");
    }
}

}  // namespace lolb
