// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "lolb/color.hpp"
#include "lolb/degrade.hpp"
#include "lolb/nn/kernels.hpp"
#include "lolb/rng.hpp"

using namespace lolb;
using nn::TensorF;

namespace {

TensorF random_tensor(std::vector<int> dims, std::uint64_t seed) {
    Rng rng(seed);
    TensorF t(std::move(dims));
    for (float& v : t.data()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
    return t;
}

ImageF random_image(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    ImageF img(h, w, 3, Domain::SRGB);
    for (float& v : img.data()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
    return img;
}

// Arg: spatial size; 32 channels in and out, 3x3.
struct ConvFixture {
    TensorF x, w, b, gy;
    explicit ConvFixture(int s)
        : x(random_tensor({s, s, 32}, 1)), w(random_tensor({32, 3, 3, 32}, 2)), b(random_tensor({32}, 3)),
          gy(random_tensor({s, s, 32}, 4)) {}
};

void BM_ConvForwardRef(benchmark::State& st) {
    ConvFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::ref::conv2d_forward(f.x, f.w, f.b));
}
void BM_ConvForwardOmp(benchmark::State& st) {
    ConvFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::conv2d_forward(f.x, f.w, f.b));
}
void BM_ConvBackwardRef(benchmark::State& st) {
    ConvFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::ref::conv2d_backward(f.x, f.w, f.gy));
}
void BM_ConvBackwardOmp(benchmark::State& st) {
    ConvFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::conv2d_backward(f.x, f.w, f.gy));
}

// Arg: spatial size; 16 channels, 5x5 per-pixel filters.
struct FacFixture {
    TensorF d, k, gy;
    explicit FacFixture(int s)
        : d(random_tensor({s, s, 16}, 5)), k(random_tensor({s, s, 16 * 25}, 6)), gy(random_tensor({s, s, 16}, 7)) {}
};

void BM_FacForwardRef(benchmark::State& st) {
    FacFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::ref::fac_forward(f.d, f.k, 5));
}
void BM_FacForwardOmp(benchmark::State& st) {
    FacFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::fac_forward(f.d, f.k, 5));
}
void BM_FacBackwardRef(benchmark::State& st) {
    FacFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::ref::fac_backward(f.d, f.k, 5, f.gy));
}
void BM_FacBackwardOmp(benchmark::State& st) {
    FacFixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(nn::fac_backward(f.d, f.k, 5, f.gy));
}

void BM_DefocusRef(benchmark::State& st) {
    const ImageF img = random_image(int(st.range(0)), int(st.range(0)), 8);
    const auto k = degrade::generalized_gaussian_kernel(2.0, 1.5, 21);
    for (auto _ : st) benchmark::DoNotOptimize(degrade::ref::convolve2d_reflect(img, k));
}
void BM_DefocusOmp(benchmark::State& st) {
    const ImageF img = random_image(int(st.range(0)), int(st.range(0)), 8);
    const auto k = degrade::generalized_gaussian_kernel(2.0, 1.5, 21);
    for (auto _ : st) benchmark::DoNotOptimize(degrade::convolve2d_reflect(img, k));
}

void BM_ResizeRef(benchmark::State& st) {
    const ImageF img = random_image(int(st.range(0)), int(st.range(0)), 9);
    for (auto _ : st) benchmark::DoNotOptimize(color::ref::resize_bilinear(img, img.height() / 8, img.width() / 8));
}
void BM_ResizeOmp(benchmark::State& st) {
    const ImageF img = random_image(int(st.range(0)), int(st.range(0)), 9);
    for (auto _ : st) benchmark::DoNotOptimize(color::resize_bilinear(img, img.height() / 8, img.width() / 8));
}

}  // namespace

BENCHMARK(BM_ConvForwardRef)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForwardOmp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackwardRef)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackwardOmp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FacForwardRef)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FacForwardOmp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FacBackwardRef)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FacBackwardOmp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DefocusRef)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DefocusOmp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResizeRef)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResizeOmp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
