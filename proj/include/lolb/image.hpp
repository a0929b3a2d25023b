#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lolb/error.hpp"

namespace lolb {

enum class Domain { SRGB, LINEAR };

const char* to_string(Domain d);

/// Float raster, row-major with interleaved channels (y, then x, then c fastest).
/// SRGB images hold display-referred values in [0,1]; LINEAR images hold
/// scene-referred values >= 0 that may exceed 1 after clipping reverse.
class ImageF {
public:
    ImageF() = default;
    ImageF(int height, int width, int channels, Domain domain, float fill = 0.0f);

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    int channels() const noexcept { return c_; }
    Domain domain() const noexcept { return domain_; }
    void set_domain(Domain d) noexcept { domain_ = d; }
    std::size_t pixel_count() const noexcept { return std::size_t(h_) * std::size_t(w_); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int y, int x, int ch) { return data_[index(y, x, ch)]; }
    float at(int y, int x, int ch) const { return data_[index(y, x, ch)]; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const ImageF& o) const noexcept {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }
    std::string shape_string() const;

    /// Throws ValidationError when an SRGB image has values outside [0,1] (beyond `slack`).
    void check_range(float slack = 1e-6f) const;

    friend bool operator==(const ImageF&, const ImageF&) = default;

private:
    std::size_t index(int y, int x, int ch) const noexcept {
        return (std::size_t(y) * std::size_t(w_) + std::size_t(x)) * std::size_t(c_) + std::size_t(ch);
    }

    int h_ = 0;
    int w_ = 0;
    int c_ = 0;
    Domain domain_ = Domain::SRGB;
    std::vector<float> data_;
};

/// Per-pixel boolean mask, one entry per (y, x).
struct SaturationMask {
    int height = 0;
    int width = 0;
    std::vector<unsigned char> data;

    bool at(int y, int x) const { return data[std::size_t(y) * std::size_t(width) + std::size_t(x)] != 0; }
    std::size_t count() const;
    static SaturationMask empty_like(const ImageF& img);
};

/// Ordered frames of identical shape and domain.
struct FrameSequence {
    std::vector<ImageF> frames;
    double fps = 24.0;

    std::size_t size() const noexcept { return frames.size(); }
    /// Throws ShapeError/DomainError when frames are not homogeneous or the list is empty.
    void validate() const;
};

}  // namespace lolb
