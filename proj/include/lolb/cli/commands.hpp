#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lolb/cli/config.hpp"

namespace lolb::cli {

struct SynthSummary {
    int sequences = 0;
    int pairs = 0;
    int skipped = 0;  // sequences that produced no pair
};

/// Walks the sequence directories under `input` (each a folder of numbered
/// PNG frames) and writes low_blur/, gt/ and meta/ under `output`. Every
/// non-overlapping window of blur.window frames becomes one pair. Throws
/// ValidationError when nothing could be synthesised.
SynthSummary synthesize_dataset(const PipelineConfig& cfg, const std::filesystem::path& input,
                                const std::filesystem::path& output, bool dump_alpha, std::ostream& log);

inline constexpr int kHistogramBins = 32;

struct LuminanceHistogram {
    std::array<int, kHistogramBins> counts{};
    int total = 0;
    int modal_bin() const;
};

/// Per-image mean luminance of every PNG directly inside `dir`.
LuminanceHistogram luminance_histogram(const std::filesystem::path& dir);
std::string histogram_csv(const LuminanceHistogram& h);
std::string histogram_chart(const LuminanceHistogram& h, int width = 50);

/// Trains on `data` and writes loss.csv + checkpoint/ under `output`.
/// With `resume`, continues from output/checkpoint and appends to the CSV.
std::vector<net::LossRecord> train_command(const PipelineConfig& cfg, const std::filesystem::path& data,
                                           const std::filesystem::path& output, bool resume, std::ostream& log);

/// Entry point of the lolblur tool. Returns the process exit code:
/// 0 success, 1 validation failure, 2 runtime failure.
int run(int argc, char** argv);

}  // namespace lolb::cli
