#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slz/checkpoint.hpp"
#include "slz/class_scheme.hpp"
#include "slz/cli.hpp"
#include "slz/commands.hpp"
#include "slz/image_io.hpp"
#include "slz/report.hpp"
#include "support.hpp"

namespace slz {
namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code = -1;
    std::string out, err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CsvTable csv(const fs::path& p) {
    std::ifstream in(p);
    return read_csv(in, p.string());
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                (std::string("slz_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    fs::path dir(const std::string& name) const { return root_ / name; }
    std::string path(const std::string& name) const { return (root_ / name).string(); }

    void write(const std::string& name, const std::string& text) const {
        fs::create_directories((root_ / name).parent_path());
        std::ofstream(root_ / name) << text;
    }

    // One image/mask pair: left half grass, right half roof.
    void write_pair(const std::string& in_dir, const std::string& stem, std::size_t w, std::size_t h) const {
        const auto p = default_palette();
        RgbImage img(w, h), mask(w, h);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const bool left = x < w / 2;
                img.set(x, y, left ? Rgb{40, 120, 40} : Rgb{90, 90, 90});
                mask.set(x, y, p.classes[p.id_of(left ? "grass" : "roof")].color);
            }
        }
        fs::create_directories(dir(in_dir) / "images");
        fs::create_directories(dir(in_dir) / "masks");
        write_png_rgb(dir(in_dir) / "images" / (stem + ".png"), img);
        write_png_rgb(dir(in_dir) / "masks" / (stem + ".png"), mask);
    }

    std::string make_corpus(std::size_t w = 32, std::size_t h = 16, std::size_t tile = 8) {
        write_pair("src", "a", w, h);
        const auto r = run({"tile", "--in", path("src"), "--out", path("corpus"), "--tile-size",
                            std::to_string(tile)});
        EXPECT_EQ(r.code, 0) << r.err;
        return path("corpus/corpus.yaml");
    }

    // Static descent rendered by `synth` with canvas equal to frame: grass and paved ground with a roof.
    std::string make_descent(std::size_t frames, const std::string& env = "park",
                             const std::string& name = "descent") {
        write(name + ".yaml",
              "width: 64\nheight: 64\nframes: " + std::to_string(frames) +
                  "\nregions:\n  - {shape: full, class: grass}\n"
                  "  - {shape: rect, class: paved-area, x: 0, y: 0, w: 20, h: 64}\n"
                  "  - {shape: rect, class: roof, x: 40, y: 40, w: 12, h: 12}\n"
                  "descent:\n  frame_size: 64\n  environment: " + env + "\n");
        const auto r = run({"synth", "--spec", path(name + ".yaml"), "--out", path(name)});
        EXPECT_EQ(r.code, 0) << r.err;
        return path(name + "/descent.yaml");
    }

    fs::path root_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"fly"}).code, kExitUsage);
    EXPECT_EQ(run({"tile"}).code, kExitUsage);
    EXPECT_EQ(run({"descend", "--out", path("o"), "--manifest", "m.yaml", "--stride", "0"}).code, kExitUsage);
    EXPECT_EQ(run({"train", "--tiles", "x", "--out", path("o"), "--scheme", "model9"}).code, kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE((r.out + r.err).find("descend"), std::string::npos);
}

TEST_F(CliTest, TileOnePairAtTileSizeGivesOneTile) {
    write_pair("src", "a", 256, 256);
    const auto r = run({"tile", "--in", path("src"), "--out", path("out")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("tiles: 1"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir("out/corpus.yaml")));
    EXPECT_TRUE(fs::exists(dir("out/effective_config.yaml")));
}

TEST_F(CliTest, TileLargeSourceGives384Tiles) {
    write_pair("src", "big", 6000, 4000);
    const auto r = run({"tile", "--in", path("src"), "--out", path("out")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("tiles: 384"), std::string::npos) << r.out;
}

TEST_F(CliTest, TileEmptyOrUnpairedInputIsDataError) {
    fs::create_directories(dir("empty/images"));
    EXPECT_EQ(run({"tile", "--in", path("empty"), "--out", path("o1")}).code, kExitData);
    write_pair("src", "a", 16, 16);
    fs::remove(dir("src/masks/a.png"));
    const auto r = run({"tile", "--in", path("src"), "--out", path("o2"), "--tile-size", "8"});
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("a.png"), std::string::npos) << r.err;
}

TEST_F(CliTest, TileSkipsUnpairedImagesWhenOthersSucceed) {
    write_pair("src", "a", 16, 16);
    write_pair("src", "b", 16, 16);
    fs::remove(dir("src/masks/b.png"));
    const auto r = run({"tile", "--in", path("src"), "--out", path("o"), "--tile-size", "8"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("tiles: 4"), std::string::npos) << r.out;
}

TEST_F(CliTest, TrainZeroEpochsWritesInitialization) {
    const auto corpus = make_corpus();
    const auto r = run({"train", "--tiles", corpus, "--out", path("m"), "--epochs", "0", "--seed", "7",
                        "--depth", "1", "--base-channels", "4"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 4;
    cfg.seed = 7;
    EXPECT_EQ(load_checkpoint(dir("m/model.slzk")), build<float>(cfg));
}

TEST_F(CliTest, TrainIsReproducibleFromEffectiveConfig) {
    const auto corpus = make_corpus();
    const auto first = run({"train", "--tiles", corpus, "--out", path("m1"), "--epochs", "2",
                            "--batch-size", "2", "--seed", "3", "--depth", "1", "--base-channels", "4"});
    ASSERT_EQ(first.code, kExitOk) << first.err;
    const auto same = run({"train", "--tiles", corpus, "--out", path("m2"), "--epochs", "2",
                           "--batch-size", "2", "--seed", "3", "--depth", "1", "--base-channels", "4"});
    ASSERT_EQ(same.code, kExitOk) << same.err;
    EXPECT_EQ(slurp(dir("m1/model.slzk")), slurp(dir("m2/model.slzk")));

    const auto replay = run({"train", "--config", path("m1/effective_config.yaml"), "--out", path("m3")});
    ASSERT_EQ(replay.code, kExitOk) << replay.err;
    EXPECT_EQ(slurp(dir("m1/model.slzk")), slurp(dir("m3/model.slzk")));
    EXPECT_EQ(slurp(dir("m1/loss.csv")), slurp(dir("m3/loss.csv")));
    EXPECT_EQ(csv(dir("m1/loss.csv")).rows.size(), 8u);  // 8 tiles, batch 2, 2 epochs
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
    const auto corpus = make_corpus();
    write("cfg.yaml", "command: train\ntiles: " + corpus + "\nepochs: 5\ndepth: 1\nbase-channels: 2\n");
    const auto r = run({"train", "--config", path("cfg.yaml"), "--out", path("m"), "--epochs", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(csv(dir("m/loss.csv")).rows.size(), 8u);  // 8 tiles, batch 1, 1 epoch
    EXPECT_NE(slurp(dir("m/effective_config.yaml")).find("epochs: 1"), std::string::npos);
    write("bad.yaml", "command: eval\n");
    EXPECT_EQ(run({"train", "--config", path("bad.yaml"), "--out", path("m")}).code, kExitUsage);
}

TEST_F(CliTest, TrainSchemeMismatchIsDataError) {
    const auto corpus = make_corpus();
    const auto r = run({"train", "--tiles", corpus, "--out", path("m"), "--scheme", "model2", "--epochs", "0"});
    EXPECT_EQ(r.code, kExitData);
}

TEST_F(CliTest, EvalOracleGivesAllOnesInTableOrder) {
    const auto corpus = make_corpus();
    const auto r = run({"eval", "--oracle", "--tiles", corpus, "--out", path("e")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto t = csv(dir("e/metrics.csv"));
    EXPECT_EQ(t.header, (std::vector<std::string>{"grass", "paved", "water", "roof", "other", "mean"}));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][t.column("grass")], "1");
    EXPECT_EQ(t.rows[0][t.column("roof")], "1");
    EXPECT_EQ(t.rows[0][t.column("water")], "");
    EXPECT_EQ(t.rows[0][t.column("mean")], "1");
}

TEST_F(CliTest, EvalRequiresExactlyOnePredictorAndMatchingClasses) {
    const auto corpus = make_corpus();
    EXPECT_EQ(run({"eval", "--tiles", corpus, "--out", path("e")}).code, kExitUsage);
    EXPECT_EQ(run({"eval", "--oracle", "--tiles", corpus, "--out", path("e"), "--scheme", "model2"}).code,
              kExitData);
    EXPECT_EQ(run({"train", "--tiles", corpus, "--out", path("m"), "--epochs", "0", "--depth", "1"}).code,
              kExitOk);
    EXPECT_EQ(run({"eval", "--checkpoint", path("m/model.slzk"), "--tiles", corpus, "--out", path("e2"),
                   "--scheme", "model1"}).code,
              kExitOk);
    UNetConfig three;
    three.depth = 1;
    three.num_classes = 3;
    save_checkpoint(dir("three.slzk"), build<float>(three));
    EXPECT_EQ(run({"eval", "--checkpoint", path("three.slzk"), "--tiles", corpus, "--out", path("e3")}).code,
              kExitData);
}

TEST(EvaluateTiles, OneClassPredictorScoresItsPrevalence) {
    testing::Rng rng(3);
    std::vector<LabeledTile> tiles;
    std::size_t grass = 0, total = 0;
    for (int i = 0; i < 4; ++i) {
        LabeledTile t;
        t.image = Tensor<float>({3, 8, 8}, 0.f);
        t.mask = testing::random_mask(8, 8, 5, rng);
        for (auto c : t.mask.cells) grass += c == 0;
        total += 64;
        tiles.push_back(t);
    }
    const auto r = evaluate_tiles([](const LabeledTile& t) { return Mask(t.mask.width, t.mask.height, 0); },
                                  tiles, 5);
    EXPECT_DOUBLE_EQ(*r.per_class[0], double(grass) / double(total));
    for (std::size_t c = 1; c < 5; ++c) EXPECT_EQ(*r.per_class[c], 0.0);
}

TEST_F(CliTest, DescendStrideTwoHalvesDecisionRows) {
    const auto manifest = make_descent(300);
    const auto one = run({"descend", "--oracle", "--manifest", manifest, "--out", path("d1")});
    ASSERT_EQ(one.code, kExitOk) << one.err;
    const auto two = run({"descend", "--oracle", "--manifest", manifest, "--out", path("d2"), "--stride", "2"});
    ASSERT_EQ(two.code, kExitOk) << two.err;
    EXPECT_EQ(csv(dir("d1/decisions.csv")).rows.size(), 300u);
    EXPECT_EQ(csv(dir("d2/decisions.csv")).rows.size(), 150u);
}

TEST_F(CliTest, DescendOracleOnStaticSceneHasZeroFpr) {
    const auto manifest = make_descent(40);
    const auto r = run({"descend", "--oracle", "--manifest", manifest, "--out", path("d")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto decisions = csv(dir("d/decisions.csv"));
    for (const char* col : {"frame_index", "altitude_m", "verdict", "zone_center_x", "zone_center_y",
                            "zone_side_px", "zone_side_m", "interframe_binary_iou", "pixels_processed"}) {
        EXPECT_TRUE(decisions.has_column(col)) << col;
    }
    const auto metrics = csv(dir("d/metrics.csv"));
    ASSERT_EQ(metrics.rows.size(), 40u);
    for (const auto& row : metrics.rows) {
        if (row[metrics.column("flags")] == "no_footprint") continue;
        EXPECT_EQ(parse_number(row[metrics.column("fpr")]), 0.0);
    }
    for (const char* f : {"iou_altitude.csv", "summary.yaml", "iou_vs_altitude.svg", "fpr_per_frame.svg",
                          "mean_iou_per_frame.svg", "effective_config.yaml"}) {
        EXPECT_TRUE(fs::exists(dir("d") / f)) << f;
    }
}

TEST_F(CliTest, DescendGroupsRunsByEnvironment) {
    const auto park = make_descent(12, "park", "p");
    const auto city = make_descent(12, "city", "c");
    const auto r = run({"descend", "--oracle", "--manifest", park, "--manifest", city, "--out", path("d")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string svg = slurp(dir("d/fpr_per_frame.svg"));
    EXPECT_NE(svg.find(">park<"), std::string::npos);
    EXPECT_NE(svg.find(">city<"), std::string::npos);
    const auto rows = csv(dir("d/decisions.csv"));
    EXPECT_EQ(rows.rows.size(), 24u);
}

TEST_F(CliTest, DescendWithMismatchedCheckpointIsDataError) {
    const auto manifest = make_descent(4);
    UNetConfig three;
    three.depth = 1;
    three.num_classes = 3;
    save_checkpoint(dir("three.slzk"), build<float>(three));
    const auto r = run({"descend", "--checkpoint", path("three.slzk"), "--manifest", manifest, "--out", path("d")});
    EXPECT_EQ(r.code, kExitData);
    EXPECT_EQ(run({"descend", "--manifest", manifest, "--out", path("d")}).code, kExitUsage);
    EXPECT_EQ(run({"descend", "--oracle", "--manifest", path("missing.yaml"), "--out", path("d")}).code,
              kExitData);
}

TEST_F(CliTest, ReportWritesSvgAndRejectsMalformedCsv) {
    write("ok.csv", "altitude_m,interframe_binary_iou\n3,0.9\n2.9,0.95\n2.8,1\n");
    const auto r = run({"report", "--csv", path("ok.csv"), "--out", path("r")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir("r/interframe_binary_iou_vs_altitude_m.svg")));
    EXPECT_NE(slurp(dir("r/interframe_binary_iou_vs_altitude_m.svg")).find("altitude (m)"), std::string::npos);

    write("bad.csv", "altitude_m,interframe_binary_iou\n3,0.9\n2.9\n");
    const auto bad = run({"report", "--csv", path("bad.csv"), "--out", path("r2")});
    EXPECT_EQ(bad.code, kExitData);
    EXPECT_NE(bad.err.find("row 3"), std::string::npos) << bad.err;
    EXPECT_NE(bad.err.find("bad.csv"), std::string::npos) << bad.err;
}

TEST_F(CliTest, EveryCommandEchoesItsConfig) {
    write("ok.csv", "x,y\n1,2\n");
    ASSERT_EQ(run({"report", "--csv", path("ok.csv"), "--out", path("r"), "--x", "x", "--y", "y"}).code, kExitOk);
    const std::string echo = slurp(dir("r/effective_config.yaml"));
    EXPECT_NE(echo.find("command: report"), std::string::npos) << echo;
    EXPECT_NE(echo.find("x: x"), std::string::npos) << echo;
}

TEST(AxisLabel, NamesAltitudeAndFrameAxes) {
    EXPECT_EQ(axis_label("altitude_m"), "altitude (m)");
    EXPECT_EQ(axis_label("frame_index"), "frame index");
    EXPECT_EQ(axis_label("mean_iou"), "mean iou");
}

}  // namespace
}  // namespace slz
