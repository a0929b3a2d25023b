#include "lolb/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lolb/nn/tensor_io.hpp"
#include "lolb/png_io.hpp"
#include "lolb/rng.hpp"

namespace lolb::net {

namespace fs = std::filesystem;
using nn::Tensor;
using nn::TensorF;

double cosine_lr(double lr0, long t, long total) {
    if (total <= 0) return lr0;
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * double(t) / double(total)));
}

template <typename T>
void adam_step(nn::ParamStore<T>& params, double lr, const AdamConfig& cfg, double grad_scale) {
    params.step += 1;
    const double t = double(params.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (nn::Param<T>& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = double(p.grad[i]) * grad_scale;
            const double m = cfg.beta1 * double(p.m[i]) + (1.0 - cfg.beta1) * g;
            const double v = cfg.beta2 * double(p.v[i]) + (1.0 - cfg.beta2) * g * g;
            p.m[i] = static_cast<T>(m);
            p.v[i] = static_cast<T>(v);
            p.value[i] = static_cast<T>(double(p.value[i]) - lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps));
        }
    }
}

template <typename T>
void check_finite_gradients(const nn::ParamStore<T>& params, long step) {
    for (const nn::Param<T>& p : params) {
        for (T g : p.grad.data()) {
            if (!std::isfinite(double(g))) throw TrainingDivergedError("gradient of " + p.name, step);
        }
    }
}

template void adam_step(nn::ParamStore<float>&, double, const AdamConfig&, double);
template void adam_step(nn::ParamStore<double>&, double, const AdamConfig&, double);
template void check_finite_gradients(const nn::ParamStore<float>&, long);
template void check_finite_gradients(const nn::ParamStore<double>&, long);

TensorF image_to_tensor(const ImageF& img) {
    if (img.domain() != Domain::SRGB) throw DomainError("network images must be SRGB");
    if (img.channels() != 3) throw ShapeError("network images must have 3 channels, got " + img.shape_string());
    TensorF t(img.height(), img.width(), 3);
    std::copy(img.data().begin(), img.data().end(), t.data().begin());
    return t;
}

ImageF tensor_to_image(const TensorF& t) {
    t.require_rank(3, "tensor_to_image");
    ImageF img(t.h(), t.w(), t.c(), Domain::SRGB);
    auto px = img.data();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::clamp(t[i], 0.0f, 1.0f);
    return img;
}

std::vector<TrainingPair> load_pairs(const fs::path& dir) {
    const fs::path low_dir = dir / "low_blur";
    const fs::path gt_dir = dir / "gt";
    if (!fs::is_directory(low_dir) || !fs::is_directory(gt_dir)) {
        throw IoError("dataset " + dir.string() + " needs low_blur/ and gt/ subdirectories");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(low_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TrainingPair> pairs;
    for (const fs::path& f : files) {
        const fs::path gt = gt_dir / f.filename();
        if (!fs::exists(gt)) throw IoError("missing ground truth for " + f.filename().string());
        TrainingPair p{image_to_tensor(load_image(f)), image_to_tensor(load_image(gt)), f.stem().string()};
        nn::require_same_shape(p.input, p.target, "training pair");
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw IoError("no training pairs found in " + dir.string());
    return pairs;
}

namespace {

// Crops (y0, x0, size) then applies `rot` quarter turns and an optional horizontal flip.
TensorF crop_augment(const TensorF& src, int y0, int x0, int size, int rot, bool flip) {
    TensorF out(size, size, src.c());
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            int sy = y, sx = flip ? size - 1 - x : x;
            for (int r = 0; r < rot; ++r) {
                const int ny = sx;
                const int nx = size - 1 - sy;
                sy = ny;
                sx = nx;
            }
            const float* ip = src.pixel(y0 + sy, x0 + sx);
            std::copy(ip, ip + src.c(), out.pixel(y, x));
        }
    }
    return out;
}

}  // namespace

TrainingPair sample_patch(const std::vector<TrainingPair>& pairs, int patch, bool augment, std::uint64_t seed,
                          long step, int slot) {
    if (pairs.empty()) throw ValidationError("no training pairs");
    Rng rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(step)), static_cast<std::uint64_t>(slot)));
    const TrainingPair& p = pairs[rng() % pairs.size()];
    const int h = p.input.h(), w = p.input.w();
    if (patch > h || patch > w) {
        throw ConfigError("patch size " + std::to_string(patch) + " exceeds pair " + p.name + " of " + p.input.shape_string());
    }
    int y0 = (h - patch) / 2, x0 = (w - patch) / 2, rot = 0;
    bool flip = false;
    if (augment) {
        y0 = static_cast<int>(rng() % std::uint64_t(h - patch + 1));
        x0 = static_cast<int>(rng() % std::uint64_t(w - patch + 1));
        rot = static_cast<int>(rng() % 4);
        flip = (rng() & 1) != 0;
    }
    return {crop_augment(p.input, y0, x0, patch, rot, flip), crop_augment(p.target, y0, x0, patch, rot, flip), p.name};
}

std::vector<LossRecord> train(LEDNet<float>& net, const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
                              std::uint64_t seed, std::ostream* log) {
    if (cfg.batch < 1) throw ConfigError("train.batch must be >= 1");
    if (cfg.steps < 0) throw ConfigError("train.steps must be >= 0");
    if (!(cfg.lr > 0.0)) throw ConfigError("train.lr must be > 0");
    check_input_shape(cfg.patch, cfg.patch);

    nn::ParamStore<float>& params = net.params();
    std::vector<LossRecord> curve;
    for (long step = params.step; step < cfg.steps; ++step) {
        const double lr = cosine_lr(cfg.lr, step, cfg.steps);
        params.zero_grad();
        LossParts sum;
        for (int slot = 0; slot < cfg.batch; ++slot) {
            const TrainingPair sample = sample_patch(pairs, cfg.patch, cfg.augment, seed, step, slot);
            const ForwardTrace<float> trace = net.forward(sample.input);
            const LossResult<float> loss = compute_loss(trace, sample.target, net.config());
            if (!std::isfinite(loss.parts.total)) throw TrainingDivergedError("loss", step);
            net.backward(loss.grad_output, loss.grad_intermediate);
            sum.l_en += loss.parts.l_en;
            sum.l_deb += loss.parts.l_deb;
            sum.total += loss.parts.total;
        }
        check_finite_gradients(params, step);
        adam_step(params, lr, {}, 1.0 / cfg.batch);

        const double inv = 1.0 / cfg.batch;
        LossRecord rec{step + 1, lr, sum.l_en * inv, sum.l_deb * inv, sum.total * inv};
        curve.push_back(rec);
        if (log && cfg.log_every > 0 && (rec.step % cfg.log_every == 0 || rec.step == cfg.steps)) {
            *log << "step " << rec.step << "/" << cfg.steps << "  lr " << std::setprecision(4) << rec.lr << "  L_en "
                 << rec.l_en << "  L_deb " << rec.l_deb << "  total " << rec.total << '\n';
        }
        if (cfg.stop_below > 0.0 && rec.total < cfg.stop_below) break;
    }
    return curve;
}

void write_loss_csv(const fs::path& path, const std::vector<LossRecord>& curve, bool append) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const bool header = !append || !fs::exists(path);
    std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    if (header) os << "step,lr,L_en,L_deb,total\n";
    os << std::setprecision(9);
    for (const LossRecord& r : curve) os << r.step << ',' << r.lr << ',' << r.l_en << ',' << r.l_deb << ',' << r.total << '\n';
}

namespace {

constexpr const char* kCheckpointFormat = "lolb-checkpoint-1";

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

}  // namespace

void save_checkpoint(const fs::path& dir, const LEDNet<float>& net) {
    fs::create_directories(dir);
    const nn::ParamStore<float>& params = net.params();
    for (const nn::Param<float>& p : params) {
        nn::save_tensor(dir / (p.name + ".tnsr"), p.value);
        nn::save_tensor(dir / (p.name + ".m.tnsr"), p.m);
        nn::save_tensor(dir / (p.name + ".v.tnsr"), p.v);
    }
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw IoError("cannot write checkpoint manifest in " + dir.string());
    os << "format = " << kCheckpointFormat << '\n'
       << "architecture = " << net.config().architecture_key() << '\n'
       << "config_hash = " << hex64(net.config().architecture_hash()) << '\n'
       << "step = " << params.step << '\n'
       << "params = " << params.size() << '\n';
}

void load_checkpoint(const fs::path& dir, LEDNet<float>& net) {
    const fs::path manifest = dir / "manifest.txt";
    std::ifstream is(manifest);
    if (!is) throw IoError("invalid checkpoint " + dir.string() + ": missing manifest.txt");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (kv["format"] != kCheckpointFormat) throw IoError("invalid checkpoint " + dir.string() + ": unknown format '" + kv["format"] + "'");
    const std::string want = hex64(net.config().architecture_hash());
    if (kv["config_hash"] != want) {
        throw ValidationError("checkpoint " + dir.string() + " was written for architecture '" + kv["architecture"] +
                              "', current config is '" + net.config().architecture_key() + "'");
    }
    nn::ParamStore<float>& params = net.params();
    for (nn::Param<float>& p : params) {
        auto load = [&](const std::string& suffix, TensorF& into) {
            TensorF t = nn::load_tensor(dir / (p.name + suffix));
            if (t.dims() != into.dims()) {
                throw IoError("invalid checkpoint: " + p.name + suffix + " has shape " + t.shape_string() + ", expected " +
                              into.shape_string());
            }
            into = std::move(t);
        };
        load(".tnsr", p.value);
        load(".m.tnsr", p.m);
        load(".v.tnsr", p.v);
    }
    try {
        params.step = std::stol(kv.at("step"));
    } catch (const std::exception&) {
        throw IoError("invalid checkpoint " + dir.string() + ": bad step entry");
    }
}

InferResult infer(LEDNet<float>& net, const ImageF& input) {
    const TensorF x = image_to_tensor(input);
    const int h = x.h(), w = x.w();
    const int ph = std::max(8, (h + 7) / 8 * 8);
    const int pw = std::max(8, (w + 7) / 8 * 8);
    auto reflect = [](int i, int n) {
        if (n == 1) return 0;
        const int period = 2 * (n - 1);
        i %= period;
        return i < n ? i : period - i;
    };
    TensorF padded(ph, pw, 3);
    for (int y = 0; y < ph; ++y)
        for (int xx = 0; xx < pw; ++xx) {
            const float* ip = x.pixel(reflect(y, h), reflect(xx, w));
            std::copy(ip, ip + 3, padded.pixel(y, xx));
        }
    const ForwardTrace<float> trace = net.forward(padded);
    TensorF out(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            const float* op = trace.output.pixel(y, xx);
            std::copy(op, op + 3, out.pixel(y, xx));
        }
    InferResult r;
    r.image = tensor_to_image(out);
    for (const TensorF& a : trace.curve_params) {
        if (a.empty()) continue;
        std::vector<TensorF> maps;
        for (int i = 0; i < a.c(); ++i) {
            TensorF m(a.h(), a.w(), 1);
            for (int y = 0; y < a.h(); ++y)
                for (int xx = 0; xx < a.w(); ++xx) m.at(y, xx, 0) = a.at(y, xx, i);
            maps.push_back(std::move(m));
        }
        r.curve_params.push_back(std::move(maps));
    }
    return r;
}

}  // namespace lolb::net
