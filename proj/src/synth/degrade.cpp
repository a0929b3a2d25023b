#include "lolb/degrade.hpp"

#include <algorithm>
#include <cmath>

#include "lolb/parallel.hpp"

namespace lolb::degrade {

DefocusKernel generalized_gaussian_kernel(double sigma, double beta, int size) {
    if (size < 1 || size % 2 == 0) throw ConfigError("defocus kernel size must be odd and positive, got " + std::to_string(size));
    if (!(sigma > 0.0)) throw ConfigError("defocus sigma must be > 0");
    if (!(beta > 0.0)) throw ConfigError("defocus beta must be > 0");
    DefocusKernel k;
    k.size = size;
    k.sigma = sigma;
    k.beta = beta;
    k.taps.resize(std::size_t(size) * std::size_t(size));
    const int r = size / 2;
    double sum = 0.0;
    for (int y = -r; y <= r; ++y) {
        for (int x = -r; x <= r; ++x) {
            const double q = double(x * x + y * y) / (sigma * sigma);
            const double v = std::exp(-0.5 * std::pow(q, beta));
            k.taps[std::size_t(y + r) * std::size_t(size) + std::size_t(x + r)] = v;
            sum += v;
        }
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

ImageF convolve2d_reflect(const ImageF& img, const DefocusKernel& kernel) {
    const int h = img.height(), w = img.width(), c = img.channels();
    const int ks = kernel.size, r = ks / 2;
    // Column indices are shared by every row.
    std::vector<int> xs(std::size_t(w + 2 * r));
    for (int x = -r; x < w + r; ++x) xs[std::size_t(x + r)] = reflect_index(x, w);
    ImageF out(h, w, c, img.domain());
    LOLB_OMP(parallel for schedule(static))
    for (int y = 0; y < h; ++y) {
        std::vector<double> acc(std::size_t(w) * std::size_t(c));
        for (int ky = 0; ky < ks; ++ky) {
            const int sy = reflect_index(y + ky - r, h);
            for (int kx = 0; kx < ks; ++kx) {
                const double tap = kernel.taps[std::size_t(ky) * std::size_t(ks) + std::size_t(kx)];
                for (int x = 0; x < w; ++x) {
                    const int sx = xs[std::size_t(x + kx)];
                    for (int ch = 0; ch < c; ++ch) acc[std::size_t(x) * c + ch] += tap * img.at(sy, sx, ch);
                }
            }
        }
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) out.at(y, x, ch) = static_cast<float>(acc[std::size_t(x) * c + ch]);
        }
    }
    return out;
}

namespace ref {

ImageF convolve2d_reflect(const ImageF& img, const DefocusKernel& kernel) {
    const int r = kernel.size / 2;
    ImageF out(img.height(), img.width(), img.channels(), img.domain());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int ch = 0; ch < img.channels(); ++ch) {
                double s = 0.0;
                for (int ky = 0; ky < kernel.size; ++ky) {
                    for (int kx = 0; kx < kernel.size; ++kx) {
                        s += kernel.at(ky, kx) * img.at(reflect_index(y + ky - r, img.height()),
                                                        reflect_index(x + kx - r, img.width()), ch);
                    }
                }
                out.at(y, x, ch) = static_cast<float>(s);
            }
        }
    }
    return out;
}

}  // namespace ref

ImageF add_noise(const ImageF& img, const NoiseParams& p, std::uint64_t seed) {
    if (!(p.shot_gain >= 0.0) || !(p.read_sigma >= 0.0)) throw ConfigError("noise parameters must be non-negative");
    ImageF out = img;
    if (p.shot_gain == 0.0 && p.read_sigma == 0.0) return out;
    Rng rng(seed);
    const double read_var = p.read_sigma * p.read_sigma;
    for (float& v : out.data()) {
        const double x = v;
        const double sd = std::sqrt(std::max(0.0, p.shot_gain * x + read_var));
        v = static_cast<float>(std::clamp(x + sd * standard_normal(rng), 0.0, 1.0));
    }
    return out;
}

void DegradeConfig::validate() const {
    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    auto range = [](double lo, double hi, const char* name, bool strict_positive) {
        if (!(lo <= hi)) throw ConfigError(std::string(name) + " range is inverted");
        if (strict_positive ? !(lo > 0.0) : !(lo >= 0.0)) throw ConfigError(std::string(name) + " range must be positive");
    };
    prob(defocus_prob, "degrade.defocus_prob");
    prob(noise_prob, "degrade.noise_prob");
    range(sigma_min, sigma_max, "degrade.sigma", true);
    range(beta_min, beta_max, "degrade.beta", true);
    range(read_sigma_min, read_sigma_max, "degrade.read_sigma", false);
    range(shot_gain_min, shot_gain_max, "degrade.shot_gain", false);
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("degrade.kernel_size must be odd");
}

ImageF apply_random_degradations(const ImageF& img, const DegradeConfig& cfg, std::uint64_t seed,
                                 DegradeRecord* record) {
    cfg.validate();
    Rng rng(seed);
    DegradeRecord rec;
    // Draw every decision up front so each stage sees a fixed number of draws.
    const double u_defocus = uniform01(rng);
    const double sigma = uniform(rng, cfg.sigma_min, cfg.sigma_max);
    const double beta = uniform(rng, cfg.beta_min, cfg.beta_max);
    const double u_noise = uniform01(rng);
    const double read_sigma = uniform(rng, cfg.read_sigma_min, cfg.read_sigma_max);
    const double shot_gain = uniform(rng, cfg.shot_gain_min, cfg.shot_gain_max);
    const std::uint64_t noise_seed = rng();

    ImageF out = img;
    if (u_defocus < cfg.defocus_prob) {
        rec.defocus = true;
        rec.sigma = sigma;
        rec.beta = beta;
        out = convolve2d_reflect(out, generalized_gaussian_kernel(sigma, beta, cfg.kernel_size));
    }
    if (u_noise < cfg.noise_prob) {
        rec.noise = true;
        rec.noise_params = {shot_gain, read_sigma};
        out = add_noise(out, rec.noise_params, noise_seed);
    }
    if (record) *record = rec;
    return out;
}

}  // namespace lolb::degrade
