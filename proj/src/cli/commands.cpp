#include "lolb/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lolb/color.hpp"
#include "lolb/net/gradsuite.hpp"
#include "lolb/nn/tensor_io.hpp"
#include "lolb/parallel.hpp"
#include "lolb/png_io.hpp"
#include "lolb/scene.hpp"

namespace lolb::cli {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".png")) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_text(const fs::path& path, const std::string& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << s;
}

struct SequenceOutcome {
    int pairs = 0;
    std::string message;
};

SequenceOutcome synth_sequence(const PipelineConfig& cfg, const fs::path& dir, const fs::path& out, bool dump_alpha) {
    SequenceOutcome r;
    const std::string id = dir.filename().string();
    FrameSequence seq;
    try {
        seq = scene::read_sequence(dir);
        if (seq.size() == 0) throw InsufficientFramesError("no PNG frames");
        seq.validate();
    } catch (const std::exception& e) {
        r.message = "skip " + id + ": " + e.what();
        return r;
    }
    const int window = cfg.blur.window;
    const int clips = int(seq.size()) / window;
    if (clips == 0) {
        r.message = "skip " + id + ": " + std::to_string(seq.size()) + " frames, need " + std::to_string(window);
        return r;
    }
    const std::uint64_t seq_seed = derive_seed(cfg.seed, id);
    std::ostringstream msg;
    for (int k = 0; k < clips; ++k) {
        FrameSequence clip;
        clip.fps = seq.fps;
        clip.frames.assign(seq.frames.begin() + k * window, seq.frames.begin() + (k + 1) * window);
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "_%03d", k);
        const std::string name = id + suffix;
        try {
            const blur::Pair pair =
                blur::make_pair(clip, cfg.blur, cfg.darken, cfg.degrade, derive_seed(seq_seed, std::uint64_t(k)));
            save_image(out / "low_blur" / (name + ".png"), pair.low_blur);
            save_image(out / "gt" / (name + ".png"), pair.gt);
            write_text(out / "meta" / (name + ".txt"), "name = " + name + "\n" + pair.record.to_text());
            if (dump_alpha && !pair.alpha.data.empty()) {
                nn::TensorF a(pair.alpha.height, pair.alpha.width, 1);
                std::copy(pair.alpha.data.begin(), pair.alpha.data.end(), a.data().begin());
                nn::save_tensor(out / "meta" / (name + "_alpha.tnsr"), a);
            }
            ++r.pairs;
        } catch (const Error& e) {
            msg << "skip " << name << ": " << e.what() << '\n';
        }
    }
    msg << id << ": " << r.pairs << "/" << clips << " pairs";
    r.message = msg.str();
    return r;
}

}  // namespace

SynthSummary synthesize_dataset(const PipelineConfig& cfg, const fs::path& input, const fs::path& output,
                                bool dump_alpha, std::ostream& log) {
    cfg.validate();
    if (!fs::is_directory(input)) throw ValidationError("input directory " + input.string() + " does not exist");
    std::vector<fs::path> seqs = sorted_entries(input, true);
    if (seqs.empty() && !sorted_entries(input, false).empty()) seqs.push_back(input);
    if (seqs.empty()) throw ValidationError("no frame sequences found in " + input.string());

    for (const char* sub : {"low_blur", "gt", "meta"}) fs::create_directories(output / sub);

    // Each sequence has its own seed and output names, so the schedule cannot
    // change the files written.
    std::vector<SequenceOutcome> outcomes(seqs.size());
    LOLB_OMP(parallel for schedule(dynamic))
    for (long i = 0; i < long(seqs.size()); ++i) {
        try {
            outcomes[std::size_t(i)] = synth_sequence(cfg, seqs[std::size_t(i)], output, dump_alpha);
        } catch (const std::exception& e) {
            outcomes[std::size_t(i)].message = "skip " + seqs[std::size_t(i)].filename().string() + ": " + e.what();
        }
    }

    SynthSummary s;
    s.sequences = int(seqs.size());
    for (const SequenceOutcome& o : outcomes) {
        log << o.message << '\n';
        s.pairs += o.pairs;
        if (o.pairs == 0) ++s.skipped;
    }
    log << "synth: " << s.pairs << " pairs from " << s.sequences << " sequences (" << s.skipped << " skipped)\n";
    if (s.pairs == 0) throw ValidationError("no pairs were synthesised");
    return s;
}

int LuminanceHistogram::modal_bin() const {
    return int(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

LuminanceHistogram luminance_histogram(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
    LuminanceHistogram h;
    for (const fs::path& f : sorted_entries(dir, false)) {
        const double m = color::mean_luminance(load_image(f));
        const int bin = std::clamp(int(m * kHistogramBins), 0, kHistogramBins - 1);
        ++h.counts[std::size_t(bin)];
        ++h.total;
    }
    if (h.total == 0) throw ValidationError("no PNG images in " + dir.string());
    return h;
}

std::string histogram_csv(const LuminanceHistogram& h) {
    std::ostringstream os;
    os << "bin,lower,upper,count,fraction\n" << std::fixed;
    for (int b = 0; b < kHistogramBins; ++b) {
        os << b << ',' << std::setprecision(5) << double(b) / kHistogramBins << ',' << double(b + 1) / kHistogramBins
           << ',' << h.counts[std::size_t(b)] << ',' << double(h.counts[std::size_t(b)]) / h.total << '\n';
    }
    return os.str();
}

std::string histogram_chart(const LuminanceHistogram& h, int width) {
    const int peak = *std::max_element(h.counts.begin(), h.counts.end());
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    for (int b = 0; b < kHistogramBins; ++b) {
        const int n = h.counts[std::size_t(b)];
        const int bar = peak ? (n * width + peak - 1) / peak : 0;
        os << '[' << double(b) / kHistogramBins << ',' << double(b + 1) / kHistogramBins << ") "
           << std::string(std::size_t(bar), '#') << (bar ? " " : "") << n << '\n';
    }
    os << "images: " << h.total << "  modal bin: " << h.modal_bin() << '\n';
    return os.str();
}

std::vector<net::LossRecord> train_command(const PipelineConfig& cfg, const fs::path& data, const fs::path& output,
                                           bool resume, std::ostream& log) {
    cfg.validate();
    const std::vector<net::TrainingPair> pairs = net::load_pairs(data);
    net::LEDNet<float> model(cfg.net);
    const fs::path ckpt = output / "checkpoint";
    if (resume) {
        net::load_checkpoint(ckpt, model);
        log << "resuming at step " << model.params().step << '\n';
    } else {
        model.params().initialize(derive_seed(cfg.seed, "init"));
    }
    log << "training on " << pairs.size() << " pairs, " << model.params().element_count() << " parameters\n";
    const auto curve = net::train(model, pairs, cfg.train, cfg.seed, &log);
    fs::create_directories(output);
    net::write_loss_csv(output / "loss.csv", curve, resume);
    net::save_checkpoint(ckpt, model);
    write_text(output / "config.txt", serialize_config(cfg));
    return curve;
}

namespace {

PipelineConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides, const CLI::Option* seed_opt,
                              std::uint64_t seed) {
    PipelineConfig cfg;
    if (!path.empty()) cfg = load_config(path);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_opt->count()) cfg.seed = seed;
    cfg.validate();
    return cfg;
}

int cmd_gradcheck(const std::string& glob, bool negative, const CLI::Option* seed_opt, std::uint64_t seed) {
    std::vector<std::uint64_t> seeds = net::kDefaultGradSeeds;
    if (seed_opt->count()) seeds = {seed, derive_seed(seed, 1), derive_seed(seed, 2)};
    const auto results = net::run_gradient_suite(glob, seeds, negative);
    if (results.empty()) throw ValidationError("no gradient checks match '" + glob + "'");
    std::printf("%-26s %6s %12s %10s %9s %8s  %s\n", "op", "seeds", "max_rel_err", "tol", "rechecked", "time_s",
                "result");
    int failed = 0;
    double total = 0.0;
    for (const auto& r : results) {
        std::size_t rechecked = 0;
        for (const auto& run : r.runs) rechecked += run.rechecked;
        std::printf("%-26s %6zu %12.3e %10.0e %9zu %8.2f  %s\n", r.name.c_str(), r.runs.size(), r.max_rel_error,
                    r.tolerance, rechecked, r.seconds, r.pass ? "PASS" : "FAIL");
        failed += !r.pass;
        total += r.seconds;
    }
    std::printf("%zu checks, %d failed, %.1f s\n", results.size(), failed, total);
    return failed ? 1 : 0;
}

int cmd_infer(const PipelineConfig& cfg, const fs::path& image, const fs::path& out, bool dump_alpha) {
    if (cfg.infer_checkpoint.empty()) throw ConfigError("infer needs --checkpoint or infer.checkpoint");
    net::LEDNet<float> model(cfg.net);
    net::load_checkpoint(cfg.infer_checkpoint, model);
    const net::InferResult r = net::infer(model, load_image(image));
    const std::string stem = image.stem().string();
    save_image(out / (stem + ".png"), r.image);
    if (dump_alpha) {
        const fs::path dir = out / (stem + "_curves");
        fs::create_directories(dir);
        int written = 0;
        for (std::size_t s = 0; s < r.curve_params.size(); ++s)
            for (std::size_t i = 0; i < r.curve_params[s].size(); ++i, ++written)
                nn::save_tensor(dir / ("scale" + std::to_string(s + 1) + "_A" + std::to_string(i + 1) + ".tnsr"),
                                r.curve_params[s][i]);
        std::cerr << "wrote " << written << " curve-parameter maps to " << dir.string() << '\n';
    }
    std::cerr << "wrote " << (out / (stem + ".png")).string() << '\n';
    return 0;
}

int cmd_stats(const fs::path& dir, const std::string& csv_path) {
    const LuminanceHistogram h = luminance_histogram(dir);
    const std::string csv = histogram_csv(h);
    if (csv_path.empty()) {
        std::cout << csv << '\n';
    } else {
        if (fs::path(csv_path).has_parent_path()) fs::create_directories(fs::path(csv_path).parent_path());
        write_text(csv_path, csv);
    }
    std::cout << histogram_chart(h);
    return 0;
}

int cmd_scenes(const fs::path& out, int count, const scene::SceneConfig& sc, std::uint64_t seed) {
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03d", i);
        scene::write_sequence(out / name, scene::random_scene(derive_seed(seed, std::uint64_t(i)), sc));
    }
    std::cerr << "wrote " << count << " sequences to " << out.string() << '\n';
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Low-light blur data synthesis and LEDNet toy training"};
    app.require_subcommand(1);

    std::string config_path, out, input, checkpoint, glob = "*", csv_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool dump_alpha = false, resume = false, negative = false;
    int count = 8;
    scene::SceneConfig sc;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Config file (key = value)");
        sub->add_option("--set", overrides, "Override a config key, key=value");
        return sub->add_option("--seed", seed, "Master seed");
    };

    auto* synth = app.add_subcommand("synth", "Synthesise low-light blurred pairs from frame sequences");
    const CLI::Option* synth_seed = common(synth);
    synth->add_option("input", input, "Directory of sequence folders (default synth.input)");
    synth->add_option("--out", out, "Output directory (default synth.output)");
    synth->add_flag("--dump-alpha", dump_alpha, "Also write each darkening alpha map as a tensor file");

    auto* grad = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");
    grad->add_option("filter", glob, "Glob over op names, e.g. 'fac*'");
    const CLI::Option* grad_seed = grad->add_option("--seed", seed, "Seed for fixtures and projections");
    grad->add_flag("--negative-control", negative, "Include the deliberately corrupted op (expected to fail)");

    auto* tr = app.add_subcommand("train", "Train LEDNet on a synthesised dataset");
    const CLI::Option* train_seed = common(tr);
    tr->add_option("data", input, "Dataset with low_blur/ and gt/ (default train.data)");
    tr->add_option("--out", out, "Output directory for loss.csv and checkpoint/ (default train.output)");
    tr->add_flag("--resume", resume, "Continue from <out>/checkpoint");

    auto* inf = app.add_subcommand("infer", "Run a trained network on one image");
    const CLI::Option* infer_seed = common(inf);
    inf->add_option("image", input, "Input PNG")->required();
    inf->add_option("--checkpoint", checkpoint, "Checkpoint directory (default infer.checkpoint)");
    inf->add_option("--out", out, "Output directory")->default_val(".");
    inf->add_flag("--dump-alpha", dump_alpha, "Write the curve-parameter maps of every scale");

    auto* st = app.add_subcommand("stats", "Mean-luminance histogram of a directory of images");
    st->add_option("dir", input, "Image directory")->required();
    st->add_option("--out", csv_path, "Write the CSV here instead of standard output");

    auto* sn = app.add_subcommand("scenes", "Generate procedural sharp frame sequences");
    sn->add_option("--out", out, "Output directory")->required();
    const CLI::Option* scene_seed = sn->add_option("--seed", seed, "Master seed");
    sn->add_option("--count", count, "Number of sequences")->check(CLI::PositiveNumber);
    sn->add_option("--frames", sc.frames, "Frames per sequence")->check(CLI::PositiveNumber);
    sn->add_option("--height", sc.height, "Frame height")->check(CLI::PositiveNumber);
    sn->add_option("--width", sc.width, "Frame width")->check(CLI::PositiveNumber);
    (void)scene_seed;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            const PipelineConfig cfg = resolve_config(config_path, overrides, synth_seed, seed);
            const fs::path in = input.empty() ? fs::path(cfg.synth_input) : fs::path(input);
            if (in.empty()) throw ConfigError("synth needs an input directory");
            synthesize_dataset(cfg, in, out.empty() ? fs::path(cfg.synth_output) : fs::path(out), dump_alpha, std::cerr);
            return 0;
        }
        if (*grad) return cmd_gradcheck(glob, negative, grad_seed, seed);
        if (*tr) {
            const PipelineConfig cfg = resolve_config(config_path, overrides, train_seed, seed);
            const fs::path data = input.empty() ? fs::path(cfg.train_data) : fs::path(input);
            if (data.empty()) throw ConfigError("train needs a dataset directory");
            train_command(cfg, data, out.empty() ? fs::path(cfg.train_output) : fs::path(out), resume, std::cerr);
            return 0;
        }
        if (*inf) {
            PipelineConfig cfg = resolve_config(config_path, overrides, infer_seed, seed);
            if (!checkpoint.empty()) cfg.infer_checkpoint = checkpoint;
            return cmd_infer(cfg, input, out, dump_alpha);
        }
        if (*st) return cmd_stats(input, csv_path);
        if (*sn) return cmd_scenes(out, count, sc, seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_validation() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace lolb::cli
