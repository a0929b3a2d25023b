#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "lolb/cli/commands.hpp"
#include "lolb/cli/config.hpp"
#include "lolb/error.hpp"
#include "lolb/png_io.hpp"
#include "lolb/scene.hpp"
#include "test_util.hpp"

using namespace lolb;
using namespace lolb::cli;
using namespace lolb::scene;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lolblur");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

void write_scenes(const fs::path& dir, int count, int frames = 7) {
    SceneConfig sc;
    sc.height = 32;
    sc.width = 32;
    sc.frames = frames;
    sc.lights = 0;
    for (int i = 0; i < count; ++i) write_sequence(dir / ("seq" + std::to_string(i)), random_scene(40 + i, sc));
}

void fill_dir(const fs::path& dir, int n, float value) {
    fs::create_directories(dir);
    for (int i = 0; i < n; ++i) save_image(dir / ("img" + std::to_string(i) + ".png"), ImageF(8, 8, 3, Domain::SRGB, value));
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughText) {
    PipelineConfig cfg;
    cfg.seed = 1234567890123ULL;
    cfg.blur.r_min = 33.25;
    cfg.net.skip_mode = net::SkipMode::CONCAT;
    cfg.train.stop_below = 0.015;
    cfg.train_data = "some/dir";
    const std::string text = serialize_config(cfg);
    const PipelineConfig back = parse_config(text);
    EXPECT_EQ(serialize_config(back), text);
    EXPECT_EQ(back.seed, cfg.seed);
    EXPECT_EQ(back.net.skip_mode, net::SkipMode::CONCAT);
    EXPECT_DOUBLE_EQ(back.train.stop_below, 0.015);
}

TEST(Config, CommentsAndOverrides) {
    PipelineConfig cfg = parse_config("# header\nblur.window = 5   # odd\n\ntrain.patch=16\n");
    EXPECT_EQ(cfg.blur.window, 5);
    EXPECT_EQ(cfg.train.patch, 16);
    set_config_value(cfg, "darken.enabled", "false");
    EXPECT_FALSE(cfg.darken.enabled);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("blur.windw = 7\n"), ConfigError);
    EXPECT_THROW(parse_config("blur.window = seven\n"), ConfigError);
    EXPECT_THROW(parse_config("blur.window 7\n"), ConfigError);
    EXPECT_THROW(parse_config("darken.enabled = maybe\n"), ConfigError);
    EXPECT_THROW(parse_config("blur.window = 6\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("train.patch = 20\n").validate(), ConfigError);
    EXPECT_THROW(load_config(test::scratch("cfg_missing") / "none.txt"), Error);
}

TEST(Stats, AllBlackAndAllWhite) {
    const auto dir = test::scratch("stats_bw");
    fill_dir(dir / "black", 5, 0.0f);
    fill_dir(dir / "white", 3, 1.0f);
    const auto b = luminance_histogram(dir / "black");
    EXPECT_EQ(b.total, 5);
    EXPECT_EQ(b.counts[0], 5);
    EXPECT_EQ(b.modal_bin(), 0);
    const auto w = luminance_histogram(dir / "white");
    EXPECT_EQ(w.counts[kHistogramBins - 1], 3);
    const std::string csv = histogram_csv(w);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin,lower,upper,count,fraction");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), kHistogramBins + 1);
    EXPECT_THROW(luminance_histogram(dir / "missing"), Error);
}

TEST(Synth, EmptyInputIsAnError) {
    const auto dir = test::scratch("synth_empty");
    fs::create_directories(dir / "in");
    std::ostringstream log;
    EXPECT_THROW(synthesize_dataset(PipelineConfig{}, dir / "in", dir / "out", false, log), ValidationError);
    EXPECT_EQ(run_cli({"synth", (dir / "in").string(), "--out", (dir / "out").string()}), 1);
}

TEST(Synth, SevenFramesGiveExactlyOnePair) {
    const auto dir = test::scratch("synth_one");
    write_scenes(dir / "in", 1);
    std::ostringstream log;
    const auto s = synthesize_dataset(PipelineConfig{}, dir / "in", dir / "out", true, log);
    EXPECT_EQ(s.sequences, 1);
    EXPECT_EQ(s.pairs, 1);
    EXPECT_TRUE(fs::exists(dir / "out/low_blur/seq0_000.png"));
    EXPECT_TRUE(fs::exists(dir / "out/gt/seq0_000.png"));
    EXPECT_TRUE(fs::exists(dir / "out/meta/seq0_000.txt"));
    EXPECT_TRUE(fs::exists(dir / "out/meta/seq0_000_alpha.tnsr"));
    // Six frames are not a full window.
    write_scenes(dir / "short", 1, 6);
    EXPECT_THROW(synthesize_dataset(PipelineConfig{}, dir / "short", dir / "out2", false, log), ValidationError);
}

TEST(Synth, DarkensAndIsReproducible) {
    const auto dir = test::scratch("synth_repro");
    write_scenes(dir / "in", 3, 14);
    PipelineConfig cfg;
    cfg.seed = 5;
    std::ostringstream log;
    const auto s = synthesize_dataset(cfg, dir / "in", dir / "a", false, log);
    EXPECT_EQ(s.pairs, 6);
    synthesize_dataset(cfg, dir / "in", dir / "b", false, log);
    EXPECT_EQ(snapshot(dir / "a"), snapshot(dir / "b"));
    cfg.seed = 6;
    synthesize_dataset(cfg, dir / "in", dir / "c", false, log);
    EXPECT_NE(snapshot(dir / "a"), snapshot(dir / "c"));

    EXPECT_LT(luminance_histogram(dir / "a/low_blur").modal_bin(), luminance_histogram(dir / "a/gt").modal_bin());
}

TEST(Cli, ExitCodes) {
    const auto dir = test::scratch("cli_codes");
    EXPECT_EQ(run_cli({}), 1);
    EXPECT_EQ(run_cli({"bogus"}), 1);
    EXPECT_EQ(run_cli({"stats", (dir / "none").string()}), 1);
    fs::create_directories(dir / "corrupt");
    std::ofstream(dir / "corrupt/bad.png") << "not a png";
    EXPECT_EQ(run_cli({"stats", (dir / "corrupt").string()}), 2);
    EXPECT_EQ(run_cli({"synth", "--set", "blur.window=4", dir.string()}), 1);
    EXPECT_EQ(run_cli({"synth", "--set", "nope=1", dir.string()}), 1);
    fill_dir(dir / "imgs", 2, 0.5f);
    EXPECT_EQ(run_cli({"stats", (dir / "imgs").string(), "--out", (dir / "h.csv").string()}), 0);
    EXPECT_TRUE(fs::exists(dir / "h.csv"));
}

TEST(Cli, GradcheckFilterAndNegativeControl) {
    EXPECT_EQ(run_cli({"gradcheck", "fac*"}), 0);
    EXPECT_EQ(run_cli({"gradcheck", "nothing_matches"}), 1);
    EXPECT_EQ(run_cli({"gradcheck", "negative/*", "--negative-control"}), 1);
}

TEST(Cli, ScenesSynthTrainInferEndToEnd) {
    const auto dir = test::scratch("cli_e2e");
    ASSERT_EQ(run_cli({"scenes", "--out", (dir / "scenes").string(), "--count", "2", "--height", "32", "--width",
                       "32", "--seed", "3"}),
              0);
    ASSERT_EQ(run_cli({"synth", (dir / "scenes").string(), "--out", (dir / "data").string(), "--seed", "3"}), 0);
    const std::vector<std::string> sets = {"--set", "net.base_channels=8", "--set", "train.steps=4", "--set",
                                           "train.batch=1", "--set", "train.patch=16"};
    std::vector<std::string> tr = {"train", (dir / "data").string(), "--out", (dir / "run").string()};
    tr.insert(tr.end(), sets.begin(), sets.end());
    ASSERT_EQ(run_cli(tr), 0);
    EXPECT_TRUE(fs::exists(dir / "run/loss.csv"));
    EXPECT_TRUE(fs::exists(dir / "run/checkpoint/manifest.txt"));

    const auto first = *fs::directory_iterator(dir / "data/low_blur");
    const std::string stem = first.path().stem().string();
    ASSERT_EQ(run_cli({"infer", first.path().string(), "--checkpoint", (dir / "run/checkpoint").string(), "--out",
                       (dir / "pred").string(), "--set", "net.base_channels=8", "--dump-alpha"}),
              0);
    EXPECT_TRUE(fs::exists(dir / "pred" / (stem + ".png")));
    EXPECT_TRUE(fs::exists(dir / "pred" / (stem + "_curves") / "scale1_A1.tnsr"));
    // Checkpoint built for a different width is rejected.
    EXPECT_EQ(run_cli({"infer", first.path().string(), "--checkpoint", (dir / "run/checkpoint").string(), "--out",
                       (dir / "pred").string()}),
              1);
}

TEST(Train, ResumeAppendsToLossCurve) {
    const auto dir = test::scratch("train_resume");
    write_scenes(dir / "in", 2);
    PipelineConfig cfg;
    cfg.net.base_channels = 8;
    cfg.train.steps = 3;
    cfg.train.batch = 1;
    cfg.train.patch = 16;
    std::ostringstream log;
    synthesize_dataset(cfg, dir / "in", dir / "data", false, log);
    train_command(cfg, dir / "data", dir / "run", false, log);
    cfg.train.steps = 5;
    const auto more = train_command(cfg, dir / "data", dir / "run", true, log);
    ASSERT_EQ(more.size(), 2u);
    EXPECT_EQ(more.front().step, 4);
    std::ifstream csv(dir / "run/loss.csv");
    int lines = 0;
    for (std::string l; std::getline(csv, l);) ++lines;
    EXPECT_EQ(lines, 1 + 5);
}
