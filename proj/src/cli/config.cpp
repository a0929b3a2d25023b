#include "lolb/cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace lolb::cli {

namespace {

struct Field {
    const char* key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

long parse_long(const std::string& key, const std::string& v) {
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Member-pointer helpers keep the table below one line per key.
template <typename Section, typename M>
Field num(const char* key, Section PipelineConfig::*sec, M Section::*m) {
    return {key,
            [=](PipelineConfig& c, const std::string& v) {
                if constexpr (std::is_floating_point_v<M>) {
                    c.*sec.*m = parse_double(key, v);
                } else {
                    c.*sec.*m = static_cast<M>(parse_long(key, v));
                }
            },
            [=](const PipelineConfig& c) {
                if constexpr (std::is_floating_point_v<M>) {
                    return fmt(c.*sec.*m);
                } else {
                    return std::to_string(c.*sec.*m);
                }
            }};
}

template <typename Section>
Field flag(const char* key, Section PipelineConfig::*sec, bool Section::*m) {
    return {key, [=](PipelineConfig& c, const std::string& v) { c.*sec.*m = parse_bool(key, v); },
            [=](const PipelineConfig& c) { return std::string(c.*sec.*m ? "true" : "false"); }};
}

Field text(const char* key, std::string PipelineConfig::*m) {
    return {key, [=](PipelineConfig& c, const std::string& v) { c.*m = v; },
            [=](const PipelineConfig& c) { return c.*m; }};
}

const std::vector<Field>& fields() {
    using P = PipelineConfig;
    static const std::vector<Field> table = {
        {"seed", [](P& c, const std::string& v) { c.seed = std::uint64_t(parse_long("seed", v)); },
         [](const P& c) { return std::to_string(c.seed); }},
        text("synth.input", &P::synth_input),
        text("synth.output", &P::synth_output),
        num("blur.window", &P::blur, &blur::BlurConfig::window),
        num("blur.interp_factor", &P::blur, &blur::BlurConfig::interp_factor),
        num("blur.r_min", &P::blur, &blur::BlurConfig::r_min),
        num("blur.r_max", &P::blur, &blur::BlurConfig::r_max),
        num("blur.delta", &P::blur, &blur::BlurConfig::delta),
        num("blur.duty_cycle", &P::blur, &blur::BlurConfig::duty_cycle),
        flag("blur.clipping_reverse", &P::blur, &blur::BlurConfig::clipping_reverse),
        flag("darken.enabled", &P::darken, &blur::DarkenConfig::enabled),
        num("darken.target_min", &P::darken, &blur::DarkenConfig::target_min),
        num("darken.target_max", &P::darken, &blur::DarkenConfig::target_max),
        num("darken.iterations", &P::darken, &blur::DarkenConfig::iterations),
        num("darken.smoothness", &P::darken, &blur::DarkenConfig::smoothness),
        num("darken.amplitude", &P::darken, &blur::DarkenConfig::amplitude),
        num("darken.base_level", &P::darken, &blur::DarkenConfig::base_level),
        num("degrade.defocus_prob", &P::degrade, &degrade::DegradeConfig::defocus_prob),
        num("degrade.sigma_min", &P::degrade, &degrade::DegradeConfig::sigma_min),
        num("degrade.sigma_max", &P::degrade, &degrade::DegradeConfig::sigma_max),
        num("degrade.beta_min", &P::degrade, &degrade::DegradeConfig::beta_min),
        num("degrade.beta_max", &P::degrade, &degrade::DegradeConfig::beta_max),
        num("degrade.kernel_size", &P::degrade, &degrade::DegradeConfig::kernel_size),
        num("degrade.noise_prob", &P::degrade, &degrade::DegradeConfig::noise_prob),
        num("degrade.read_sigma_min", &P::degrade, &degrade::DegradeConfig::read_sigma_min),
        num("degrade.read_sigma_max", &P::degrade, &degrade::DegradeConfig::read_sigma_max),
        num("degrade.shot_gain_min", &P::degrade, &degrade::DegradeConfig::shot_gain_min),
        num("degrade.shot_gain_max", &P::degrade, &degrade::DegradeConfig::shot_gain_max),
        num("net.base_channels", &P::net, &net::LEDNetConfig::base_channels),
        num("net.curve_n", &P::net, &net::LEDNetConfig::curve_n),
        num("net.fac_d", &P::net, &net::LEDNetConfig::fac_d),
        flag("net.use_ppm", &P::net, &net::LEDNetConfig::use_ppm),
        flag("net.use_curve_nlu", &P::net, &net::LEDNetConfig::use_curve_nlu),
        {"net.skip_mode", [](P& c, const std::string& v) { c.net.skip_mode = net::parse_skip_mode(v); },
         [](const P& c) { return std::string(net::to_string(c.net.skip_mode)); }},
        flag("loss.use_enh_loss", &P::net, &net::LEDNetConfig::use_enh_loss),
        num("loss.lambda_per", &P::net, &net::LEDNetConfig::lambda_per),
        num("loss.lambda_en", &P::net, &net::LEDNetConfig::lambda_en),
        num("loss.lambda_deb", &P::net, &net::LEDNetConfig::lambda_deb),
        text("train.data", &P::train_data),
        text("train.output", &P::train_output),
        num("train.steps", &P::train, &net::TrainConfig::steps),
        num("train.batch", &P::train, &net::TrainConfig::batch),
        num("train.patch", &P::train, &net::TrainConfig::patch),
        num("train.lr", &P::train, &net::TrainConfig::lr),
        flag("train.augment", &P::train, &net::TrainConfig::augment),
        num("train.log_every", &P::train, &net::TrainConfig::log_every),
        num("train.stop_below", &P::train, &net::TrainConfig::stop_below),
        text("infer.checkpoint", &P::infer_checkpoint),
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::validate() const {
    blur.validate();
    if (blur.window % 2 == 0) throw ConfigError("blur.window must be odd");
    darken.validate();
    degrade.validate();
    net.validate();
    if (train.steps < 0) throw ConfigError("train.steps must be >= 0");
    if (train.batch < 1) throw ConfigError("train.batch must be >= 1");
    if (train.patch < 8 || train.patch % 8 != 0) throw ConfigError("train.patch must be a positive multiple of 8");
    if (!(train.lr > 0.0)) throw ConfigError("train.lr must be positive");
    if (train.log_every < 1) throw ConfigError("train.log_every must be >= 1");
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
        if (key == f.key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    apply_config_text(cfg, text);
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
    std::string out;
    std::string section;
    for (const Field& f : fields()) {
        const std::string key = f.key;
        const std::string sec = key.substr(0, key.find('.'));
        if (!out.empty() && sec != section) out += '\n';
        section = sec;
        out += key + " = " + f.get(cfg) + '\n';
    }
    return out;
}

}  // namespace lolb::cli
