#include "lolb/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "lolb/png_io.hpp"
#include "lolb/rng.hpp"

namespace lolb::scene {

namespace fs = std::filesystem;

namespace {

struct Disc {
    double y, x, radius, vy, vx;
    float rgb[3];
};

// Fraction of a pixel covered by a disc, from a 4x4 subsample grid.
double coverage(const Disc& d, double cy, double cx, int y, int x) {
    int hits = 0;
    for (int sy = 0; sy < 4; ++sy) {
        for (int sx = 0; sx < 4; ++sx) {
            const double py = y + (sy + 0.5) / 4.0 - cy;
            const double px = x + (sx + 0.5) / 4.0 - cx;
            if (py * py + px * px <= d.radius * d.radius) ++hits;
        }
    }
    return hits / 16.0;
}

void paint(ImageF& img, const Disc& d, int frame) {
    const double cy = d.y + d.vy * frame;
    const double cx = d.x + d.vx * frame;
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - d.radius - 1)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + d.radius + 1)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - d.radius - 1)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + d.radius + 1)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double a = coverage(d, cy, cx, y, x);
            if (a <= 0.0) continue;
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>((1.0 - a) * img.at(y, x, c) + a * d.rgb[c]);
        }
    }
}

}  // namespace

FrameSequence random_scene(std::uint64_t seed, const SceneConfig& cfg) {
    if (cfg.height < 1 || cfg.width < 1 || cfg.frames < 1) throw ConfigError("scene dimensions must be positive");
    Rng rng(seed);
    // Background: two-colour gradient with a sinusoidal texture.
    float base[2][3];
    for (auto& col : base)
        for (float& v : col) v = static_cast<float>(uniform(rng, 0.3, 0.8));
    const double fy = uniform(rng, 0.1, 0.5), fx = uniform(rng, 0.1, 0.5), phase = uniform(rng, 0.0, 6.28);
    const double pan_x = uniform(rng, -cfg.max_speed, cfg.max_speed);

    std::vector<Disc> discs;
    for (int i = 0; i < cfg.objects; ++i) {
        Disc d{};
        d.y = uniform(rng, 0, cfg.height);
        d.x = uniform(rng, 0, cfg.width);
        d.radius = uniform(rng, 3.0, std::max(4.0, cfg.height / 6.0));
        d.vy = uniform(rng, -cfg.max_speed, cfg.max_speed);
        d.vx = uniform(rng, -cfg.max_speed, cfg.max_speed);
        for (float& v : d.rgb) v = static_cast<float>(uniform(rng, 0.05, 0.95));
        discs.push_back(d);
    }
    for (int i = 0; i < cfg.lights; ++i) {
        Disc d{};
        d.y = uniform(rng, 0, cfg.height);
        d.x = uniform(rng, 0, cfg.width);
        d.radius = uniform(rng, 1.0, 2.5);
        d.vy = uniform(rng, -cfg.max_speed, cfg.max_speed);
        d.vx = uniform(rng, -cfg.max_speed, cfg.max_speed);
        d.rgb[0] = d.rgb[1] = d.rgb[2] = 1.0f;
        discs.push_back(d);
    }

    FrameSequence seq;
    seq.fps = 250.0;
    for (int f = 0; f < cfg.frames; ++f) {
        ImageF img(cfg.height, cfg.width, 3, Domain::SRGB);
        for (int y = 0; y < cfg.height; ++y) {
            const double t = double(y) / std::max(1, cfg.height - 1);
            for (int x = 0; x < cfg.width; ++x) {
                const double tex = 0.1 * std::sin(fy * y + fx * (x - pan_x * f) + phase);
                for (int c = 0; c < 3; ++c) {
                    const double v = (1 - t) * base[0][c] + t * base[1][c] + tex;
                    img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
        }
        for (const Disc& d : discs) paint(img, d, f);
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

FrameSequence moving_square(int height, int width, int frames, int size, int y0, int x0, double dx) {
    FrameSequence seq;
    for (int f = 0; f < frames; ++f) {
        ImageF img(height, width, 3, Domain::SRGB, 0.0f);
        const int left = x0 + static_cast<int>(std::lround(dx * f));
        for (int y = y0; y < y0 + size && y < height; ++y)
            for (int x = std::max(0, left); x < left + size && x < width; ++x)
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = 1.0f;
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

FrameSequence moving_dot(int height, int width, int frames, double radius, double y0, double x0, double dy,
                         double dx) {
    constexpr int kSub = 8;
    FrameSequence seq;
    for (int f = 0; f < frames; ++f) {
        const double cy = y0 + dy * f, cx = x0 + dx * f;
        ImageF img(height, width, 3, Domain::SRGB, 0.0f);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                int hits = 0;
                for (int sy = 0; sy < kSub; ++sy)
                    for (int sx = 0; sx < kSub; ++sx) {
                        const double py = y + (sy + 0.5) / kSub - cy, px = x + (sx + 0.5) / kSub - cx;
                        hits += py * py + px * px <= radius * radius;
                    }
                const float v = static_cast<float>(std::pow(hits / double(kSub * kSub), 1.0 / 2.2));
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = v;
            }
        }
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

void write_sequence(const fs::path& dir, const FrameSequence& seq) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu.png", i);
        save_image(dir / name, seq.frames[i]);
    }
}

FrameSequence read_sequence(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    FrameSequence seq;
    for (const fs::path& f : files) seq.frames.push_back(load_image(f));
    return seq;
}

}  // namespace lolb::scene
