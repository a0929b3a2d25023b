#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lolb/blursynth.hpp"
#include "lolb/net/lednet.hpp"
#include "lolb/net/train.hpp"

namespace lolb::cli {

/// Every tunable of the pipeline in one place. Text form is one `key = value`
/// per line with dotted section prefixes (blur.window = 7); `#` starts a comment.
struct PipelineConfig {
    std::uint64_t seed = 0;

    std::string synth_input;
    std::string synth_output = "synth_out";
    blur::BlurConfig blur;
    blur::DarkenConfig darken;
    degrade::DegradeConfig degrade;

    net::LEDNetConfig net;
    net::TrainConfig train;
    std::string train_data;
    std::string train_output = "train_out";

    std::string infer_checkpoint;

    /// Throws ConfigError on the first invalid section.
    void validate() const;
};

/// Applies `text` on top of `cfg`. Unknown keys, malformed lines and
/// unparsable values throw ConfigError naming the line.
void apply_config_text(PipelineConfig& cfg, const std::string& text);
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);
/// Every key with its current value; parse_config(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& cfg);

}  // namespace lolb::cli
