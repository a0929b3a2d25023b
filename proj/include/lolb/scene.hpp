#pragma once

#include <cstdint>
#include <filesystem>

#include "lolb/image.hpp"

namespace lolb::scene {

/// Procedural normal-light clips used as sharp source sequences: a textured
/// background, moving coloured discs and a few saturated light sources.
struct SceneConfig {
    int height = 64;
    int width = 64;
    int frames = 7;
    int objects = 4;
    int lights = 2;
    double max_speed = 1.5;  // pixels per source frame
};

FrameSequence random_scene(std::uint64_t seed, const SceneConfig& cfg = {});

/// White square of side `size` on black, moving `dx` pixels per frame starting at (y0, x0).
FrameSequence moving_square(int height, int width, int frames, int size, int y0, int x0, double dx);

/// White disc of radius `radius` on black moving (dy, dx) pixels per frame from
/// centre (y0, x0). Edge pixels hold the disc's area coverage in linear light,
/// so the curved rim produces a continuum of partially lit values.
FrameSequence moving_dot(int height, int width, int frames, double radius, double y0, double x0, double dy, double dx);

/// Writes frames as frame_000.png, frame_001.png, ...
void write_sequence(const std::filesystem::path& dir, const FrameSequence& seq);
/// Reads every PNG in `dir` in lexicographic order.
FrameSequence read_sequence(const std::filesystem::path& dir);

}  // namespace lolb::scene
