#include "lolb/color.hpp"

#include <algorithm>
#include <cmath>

#include "lolb/parallel.hpp"

namespace lolb::color {

namespace {

// Y row of the sRGB (D65) -> XYZ matrix.
constexpr double kYr = 0.2126729;
constexpr double kYg = 0.7151522;
constexpr double kYb = 0.0721750;

void require_domain(const ImageF& img, Domain want, const char* op) {
    if (img.domain() != want) {
        throw DomainError(std::string(op) + " expects a " + to_string(want) + " image, got " +
                          to_string(img.domain()));
    }
}

void require_rgb(const ImageF& img, const char* op) {
    if (img.channels() != 3) throw ShapeError(std::string(op) + " needs 3 channels, got " + img.shape_string());
}

}  // namespace

ImageF srgb_to_linear(const ImageF& img) {
    require_domain(img, Domain::SRGB, "srgb_to_linear");
    ImageF out = img;
    out.set_domain(Domain::LINEAR);
    auto src = img.data();
    auto dst = out.data();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(src.size());
    LOLB_OMP(parallel for schedule(static))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        dst[i] = static_cast<float>(std::pow(static_cast<double>(src[i]), kGamma));
    }
    return out;
}

ImageF linear_to_srgb(const ImageF& img) {
    require_domain(img, Domain::LINEAR, "linear_to_srgb");
    ImageF out = img;
    out.set_domain(Domain::SRGB);
    auto src = img.data();
    auto dst = out.data();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(src.size());
    LOLB_OMP(parallel for schedule(static))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
        dst[i] = static_cast<float>(std::pow(v, 1.0 / kGamma));
    }
    return out;
}

double lightness_from_luminance(double y) {
    constexpr double eps = 216.0 / 24389.0;
    constexpr double kappa = 24389.0 / 27.0;
    const double f = y > eps ? std::cbrt(y) : (kappa * y + 16.0) / 116.0;
    return std::clamp(116.0 * f - 16.0, 0.0, 100.0);
}

std::vector<float> lab_lightness(const ImageF& img) {
    require_rgb(img, "lab_lightness");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(img.pixel_count());
    std::vector<float> out(static_cast<std::size_t>(n));
    auto px = img.data();
    LOLB_OMP(parallel for schedule(static))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const float* p = px.data() + 3 * i;
        const double y = kYr * std::pow(double(p[0]), kGamma) + kYg * std::pow(double(p[1]), kGamma) +
                         kYb * std::pow(double(p[2]), kGamma);
        out[static_cast<std::size_t>(i)] = static_cast<float>(lightness_from_luminance(y));
    }
    return out;
}

SaturationMask saturation_mask(const ImageF& img, double delta) {
    const std::vector<float> lightness = lab_lightness(img);
    SaturationMask m = SaturationMask::empty_like(img);
    for (std::size_t i = 0; i < lightness.size(); ++i) m.data[i] = lightness[i] > delta ? 1 : 0;
    return m;
}

double mean_luminance(const ImageF& img) {
    auto px = img.data();
    double sum = 0.0;
    if (img.channels() == 1) {
        for (float v : px) sum += v;
    } else {
        for (std::size_t i = 0; i < px.size(); i += 3) {
            sum += 0.2126 * px[i] + 0.7152 * px[i + 1] + 0.0722 * px[i + 2];
        }
    }
    return sum / static_cast<double>(img.pixel_count());
}

namespace {

struct Tap {
    int i0, i1;
    double t;
};

// Corner-aligned source coordinate for each destination index.
std::vector<Tap> axis_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    for (int i = 0; i < dst; ++i) {
        const double pos = dst == 1 ? 0.5 * (src - 1) : double(i) * double(src - 1) / double(dst - 1);
        int i0 = static_cast<int>(std::floor(pos));
        i0 = std::clamp(i0, 0, src - 1);
        const int i1 = std::min(i0 + 1, src - 1);
        taps[static_cast<std::size_t>(i)] = {i0, i1, pos - i0};
    }
    return taps;
}

void check_resize_args(const ImageF& img, int new_h, int new_w) {
    if (img.empty()) throw ShapeError("resize of an empty image");
    if (new_h < 1 || new_w < 1) throw ShapeError("resize target must be at least 1x1");
}

}  // namespace

ImageF resize_bilinear(const ImageF& img, int new_h, int new_w) {
    check_resize_args(img, new_h, new_w);
    if (new_h == img.height() && new_w == img.width()) return img;
    const auto ty = axis_taps(img.height(), new_h);
    const auto tx = axis_taps(img.width(), new_w);
    const int c = img.channels();
    ImageF out(new_h, new_w, c, img.domain());
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < new_h; ++y) {
        const Tap& a = ty[std::size_t(y)];
        for (int x = 0; x < new_w; ++x) {
            const Tap& b = tx[std::size_t(x)];
            for (int ch = 0; ch < c; ++ch) {
                const double top = (1.0 - b.t) * img.at(a.i0, b.i0, ch) + b.t * img.at(a.i0, b.i1, ch);
                const double bot = (1.0 - b.t) * img.at(a.i1, b.i0, ch) + b.t * img.at(a.i1, b.i1, ch);
                out.at(y, x, ch) = static_cast<float>((1.0 - a.t) * top + a.t * bot);
            }
        }
    }
    return out;
}

namespace ref {

ImageF resize_bilinear(const ImageF& img, int new_h, int new_w) {
    check_resize_args(img, new_h, new_w);
    if (new_h == img.height() && new_w == img.width()) return img;
    ImageF out(new_h, new_w, img.channels(), img.domain());
    for (int y = 0; y < new_h; ++y) {
        for (int x = 0; x < new_w; ++x) {
            const double sy = new_h == 1 ? 0.5 * (img.height() - 1) : y * double(img.height() - 1) / (new_h - 1);
            const double sx = new_w == 1 ? 0.5 * (img.width() - 1) : x * double(img.width() - 1) / (new_w - 1);
            const int y0 = static_cast<int>(std::floor(sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const int y1 = std::min(y0 + 1, img.height() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double fy = sy - y0;
            const double fx = sx - x0;
            for (int ch = 0; ch < img.channels(); ++ch) {
                const double v = (1 - fy) * ((1 - fx) * img.at(y0, x0, ch) + fx * img.at(y0, x1, ch)) +
                                 fy * ((1 - fx) * img.at(y1, x0, ch) + fx * img.at(y1, x1, ch));
                out.at(y, x, ch) = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace ref

}  // namespace lolb::color
