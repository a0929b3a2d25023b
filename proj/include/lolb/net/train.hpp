#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lolb/image.hpp"
#include "lolb/net/lednet.hpp"
#include "lolb/net/loss.hpp"

namespace lolb::net {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
};

/// lr0 * (1 + cos(pi * t / total)) / 2
double cosine_lr(double lr0, long t, long total);

/// One Adam update using gradients scaled by `grad_scale` (1/batch for a mean).
/// Increments params.step.
template <typename T>
void adam_step(nn::ParamStore<T>& params, double lr, const AdamConfig& cfg = {}, double grad_scale = 1.0);

/// Throws TrainingDivergedError naming the first parameter with a non-finite gradient.
template <typename T>
void check_finite_gradients(const nn::ParamStore<T>& params, long step);

nn::TensorF image_to_tensor(const ImageF& img);
/// Clamps to [0,1] and tags the result SRGB.
ImageF tensor_to_image(const nn::TensorF& t);

struct TrainingPair {
    nn::TensorF input;   // low-light blurred
    nn::TensorF target;  // ground truth
    std::string name;
};

/// Loads <dir>/low_blur/*.png with the same-named file from <dir>/gt.
std::vector<TrainingPair> load_pairs(const std::filesystem::path& dir);

struct TrainConfig {
    long steps = 500;
    int batch = 4;
    int patch = 32;
    double lr = 1e-3;
    bool augment = true;  // random crop position, flips and 90-degree rotations
    int log_every = 50;
    double stop_below = 0.0;  // stop once the batch loss falls below this (0 = never)
};

struct LossRecord {
    long step = 0;
    double lr = 0.0;
    double l_en = 0.0;
    double l_deb = 0.0;
    double total = 0.0;
};

/// Extracts the batch sample used at (seed, step, slot): crop, flip and rotation
/// are drawn from a stream derived from those three values only.
TrainingPair sample_patch(const std::vector<TrainingPair>& pairs, int patch, bool augment, std::uint64_t seed,
                          long step, int slot);

/// Trains `net` in place from params().step up to `steps` total steps. The
/// schedule horizon is `steps`, so resuming continues the same curve.
std::vector<LossRecord> train(LEDNet<float>& net, const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
                              std::uint64_t seed, std::ostream* log = nullptr);

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRecord>& curve, bool append = false);

/// Directory of TNSR files (value, Adam moments) plus manifest.txt with the
/// architecture hash and step counter.
void save_checkpoint(const std::filesystem::path& dir, const LEDNet<float>& net);
/// Throws IoError/ValidationError for missing files or an architecture mismatch.
void load_checkpoint(const std::filesystem::path& dir, LEDNet<float>& net);

struct InferResult {
    ImageF image;
    /// curve_params[scale][i] is the (H_s, W_s, 1) map of iteration i.
    std::vector<std::vector<nn::TensorF>> curve_params;
};

/// Reflect-pads to a valid network size, runs the network and crops back.
InferResult infer(LEDNet<float>& net, const ImageF& input);

}  // namespace lolb::net
