#include "slz/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "slz/commands.hpp"

namespace fs = std::filesystem;

namespace slz {

namespace {

constexpr const char* kEchoFile = "effective_config.yaml";

std::string long_name(const std::string& token) {
    if (token.rfind("--", 0) != 0) return {};
    return token.substr(2, token.find('=') - 2);
}

/// Turns a YAML config map into `--key=value` tokens, skipping keys that
/// also appear on the command line so flags win.
std::vector<std::string> config_tokens(const fs::path& path, const std::string& subcommand,
                                       const std::set<std::string>& given) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw UsageError("cannot read config file " + path.string());
    } catch (const YAML::Exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
    if (root.IsNull()) return {};
    if (!root.IsMap()) throw UsageError(path.string() + ": config must be a key/value map");
    std::vector<std::string> tokens;
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key == "command") {
            if (kv.second.as<std::string>() != subcommand) {
                throw UsageError(path.string() + " is a config for '" + kv.second.as<std::string>() +
                                 "', not '" + subcommand + "'");
            }
            continue;
        }
        if (key == "config" || given.count(key)) continue;
        if (kv.second.IsSequence()) {
            for (const auto& item : kv.second) tokens.push_back("--" + key + "=" + item.as<std::string>());
        } else if (kv.second.IsScalar()) {
            tokens.push_back("--" + key + "=" + kv.second.as<std::string>());
        } else if (!kv.second.IsNull()) {
            throw UsageError(path.string() + ": value of '" + key + "' must be a scalar or a list");
        }
    }
    return tokens;
}

void write_echo(const CLI::App& sub, const fs::path& out_dir) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "command" << YAML::Value << sub.get_name();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (opt->get_type_size() == 0) {
            e << YAML::Key << name << YAML::Value << (opt->count() > 0 && opt->as<bool>());
            continue;
        }
        std::vector<std::string> values = opt->results();
        if (values.empty()) {
            const std::string def = opt->get_default_str();
            if (def.empty()) continue;
            values.push_back(def);
        }
        e << YAML::Key << name << YAML::Value;
        if (opt->get_expected_max() > 1) {
            e << YAML::BeginSeq;
            for (const auto& v : values) e << v;
            e << YAML::EndSeq;
        } else {
            e << values.back();
        }
    }
    e << YAML::EndMap;
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / kEchoFile);
    out << e.c_str() << '\n';
    if (!out) throw std::runtime_error("cannot write " + (out_dir / kEchoFile).string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Safe landing zone toolkit: tiling, training, evaluation, descent simulation, reports",
                 "slz"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    fs::path config_path;
    fs::path out_dir;
    std::string scheme = "model3";
    std::uint64_t seed = 0;
    const auto common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", config_path, "YAML file of option values; flags win");
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--scheme", scheme, "Class scheme name (model1|model2|model3) or file");
        if (with_seed) sub->add_option("--seed", seed, "Random seed");
    };

    TileCommand tile;
    std::string mask_format = "color";
    auto* tile_cmd = app.add_subcommand("tile", "Cut image/mask pairs into a tile corpus");
    common(tile_cmd, true);
    tile_cmd->add_option("--in", tile.in_dir, "Directory with images/ and masks/")->required();
    tile_cmd->add_option("--tile-size", tile.tile_size, "Tile side in pixels")
        ->check(CLI::PositiveNumber);
    tile_cmd->add_option("--section-size", tile.section_size,
                         "Source section side before resizing (0 = tile size)");
    tile_cmd->add_option("--mask-format", mask_format, "color (palette RGB) or ids (gray base IDs)")
        ->check(CLI::IsMember({"color", "ids"}));
    tile_cmd->add_option("--augment", tile.augment,
                         "Augmentation op, repeatable: horizontal_flip, rotate90[:k], "
                         "brightness_jitter, rescale");

    TrainCommand train;
    auto* train_cmd = app.add_subcommand("train", "Train a U-Net on a tile corpus");
    common(train_cmd, true);
    train_cmd->add_option("--tiles", train.tiles, "Corpus manifest")->required();
    train_cmd->add_option("--depth", train.unet.depth, "Encoder stages")->check(CLI::PositiveNumber);
    train_cmd->add_option("--base-channels", train.unet.base_channels, "Channels of the first stage")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train.epochs, "Passes over the corpus");
    train_cmd->add_option("--batch-size", train.batch_size, "Tiles per ADAM step")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train.adam.learning_rate, "ADAM learning rate")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--beta1", train.adam.beta1, "ADAM beta1")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--beta2", train.adam.beta2, "ADAM beta2")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--epsilon", train.adam.epsilon, "ADAM epsilon")->check(CLI::PositiveNumber);
    std::uint64_t shuffle_seed = 0;
    auto* shuffle_opt = train_cmd->add_option("--shuffle-seed", shuffle_seed,
                                              "Shuffle seed (defaults to --seed)")
                            ->default_str("");
    int ignore_label = 0;
    auto* ignore_opt = train_cmd->add_option("--ignore-label", ignore_label,
                                             "Class ID excluded from the loss")
                           ->check(CLI::Range(0, 255))
                           ->default_str("");

    EvalCommand eval;
    fs::path eval_checkpoint;
    auto* eval_cmd = app.add_subcommand("eval", "Per-class and mean IOU of a model on a corpus");
    common(eval_cmd, false);
    auto* eval_ckpt_opt = eval_cmd->add_option("--checkpoint", eval_checkpoint, "Model checkpoint");
    eval_cmd->add_flag("--oracle", eval.oracle, "Use the truth masks as predictions");
    eval_cmd->add_option("--tiles", eval.tiles, "Corpus manifest")->required();

    DescendCommand descend;
    fs::path descend_checkpoint;
    std::string fov_axis = "side";
    double drop_per_frame = kDefaultDropPerFrame;
    double descent_rate = kDefaultDescentRate;
    auto* descend_cmd = app.add_subcommand("descend", "Run the landing pipeline over descents");
    common(descend_cmd, false);
    auto* descend_ckpt_opt =
        descend_cmd->add_option("--checkpoint", descend_checkpoint, "Model checkpoint");
    descend_cmd->add_flag("--oracle", descend.oracle, "Segment with the manifest's truth masks");
    descend_cmd->add_option("--manifest", descend.manifests, "Descent manifest, repeatable")
        ->required();
    descend_cmd->add_option("--stride", descend.pipeline.stride, "Process every n-th frame")
        ->check(CLI::PositiveNumber);
    descend_cmd->add_option("--crop-fraction", descend.pipeline.crop_fraction,
                            "Centered crop per side, in (0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    descend_cmd->add_option("--threshold", descend.pipeline.dynamic_iou_threshold,
                            "Inter-frame IOU below which a dynamic object is assumed")
        ->check(CLI::Range(0.0, 1.0));
    descend_cmd->add_option("--drone-footprint", descend.pipeline.drone_footprint_m,
                            "Required landing square side in meters")
        ->check(CLI::NonNegativeNumber);
    descend_cmd->add_option("--fov-deg", descend.camera.fov_degrees, "Camera field of view")
        ->check(CLI::Range(0.0, 180.0));
    descend_cmd->add_option("--fov-axis", fov_axis, "side, horizontal, vertical or diagonal")
        ->check(CLI::IsMember({"side", "horizontal", "vertical", "diagonal"}));
    auto* drop_opt = descend_cmd->add_option("--drop-per-frame", drop_per_frame,
                                             "Altitude drop per frame in meters (default 0.1)")
                         ->check(CLI::PositiveNumber)
                         ->default_str("");
    auto* rate_opt = descend_cmd->add_option("--descent-rate", descent_rate,
                                             "Descent speed in m/s (used without --drop-per-frame)")
                         ->check(CLI::PositiveNumber)
                         ->default_str("");
    descend_cmd->add_option("--fps", descend.profile.fps, "Frame rate")->check(CLI::PositiveNumber);

    ReportCommand report;
    std::string group;
    auto* report_cmd = app.add_subcommand("report", "SVG line charts from CSV files");
    report_cmd->add_option("--config", config_path, "YAML file of option values; flags win");
    report_cmd->add_option("--out", out_dir, "Output directory")->required();
    report_cmd->add_option("--csv", report.csv, "Input CSV, repeatable")->required();
    report_cmd->add_option("--x", report.x, "Column for the horizontal axis");
    report_cmd->add_option("--y", report.y, "Column for the vertical axis");
    auto* group_opt = report_cmd->add_option("--group", group, "Column that splits series");
    report_cmd->add_flag("--average", report.average, "Average y over rows sharing (series, x)");
    report_cmd->add_option("--title", report.title, "Chart title");
    report_cmd->add_option("--name", report.name, "Output file stem");

    SynthCommand synth;
    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic scene or descent");
    synth_cmd->add_option("--config", config_path, "YAML file of option values; flags win");
    synth_cmd->add_option("--out", out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", seed, "Random seed");
    synth_cmd->add_option("--spec", synth.spec, "Scene or descent spec file")->required();

    CLI::App* active = nullptr;
    try {
        std::vector<std::string> tokens = args;
        if (!tokens.empty() && tokens.front().rfind("-", 0) != 0) {
            // Expand --config before parsing so explicit flags override it.
            std::set<std::string> given;
            std::optional<fs::path> cfg;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                const std::string name = long_name(tokens[i]);
                if (name.empty()) continue;
                given.insert(name);
                if (name != "config") continue;
                if (tokens[i].find('=') != std::string::npos) {
                    cfg = tokens[i].substr(tokens[i].find('=') + 1);
                } else if (i + 1 < tokens.size()) {
                    cfg = tokens[i + 1];
                }
            }
            if (cfg) {
                auto extra = config_tokens(*cfg, tokens.front(), given);
                tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
            }
        }
        std::reverse(tokens.begin(), tokens.end());
        app.parse(tokens);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    for (auto* sub : app.get_subcommands()) active = sub;
    try {
        write_echo(*active, out_dir);
        const std::string name = active->get_name();
        if (name == "tile") {
            tile.out_dir = out_dir;
            tile.scheme = scheme;
            tile.seed = seed;
            tile.mask_format = mask_format == "ids" ? MaskFormat::ids : MaskFormat::color;
            cmd_tile(tile, out);
        } else if (name == "train") {
            train.out_dir = out_dir;
            train.scheme = scheme;
            train.unet.seed = seed;
            if (shuffle_opt->count()) train.shuffle_seed = shuffle_seed;
            if (ignore_opt->count()) train.ignore_label = static_cast<std::uint8_t>(ignore_label);
            cmd_train(train, out);
        } else if (name == "eval") {
            eval.out_dir = out_dir;
            eval.scheme = scheme;
            if (eval_ckpt_opt->count()) eval.checkpoint = eval_checkpoint;
            cmd_eval(eval, out);
        } else if (name == "descend") {
            descend.out_dir = out_dir;
            descend.scheme = scheme;
            if (descend_ckpt_opt->count()) descend.checkpoint = descend_checkpoint;
            descend.camera.axis = parse_fov_axis(fov_axis);
            if (rate_opt->count() && !drop_opt->count()) {
                descend.profile.descent_rate_mps = descent_rate;
                descend.profile.drop_per_frame.reset();
            } else {
                descend.profile.drop_per_frame = drop_per_frame;
            }
            cmd_descend(descend, out);
        } else if (name == "report") {
            report.out_dir = out_dir;
            if (group_opt->count()) report.group = group;
            cmd_report(report, out);
        } else if (name == "synth") {
            synth.out_dir = out_dir;
            synth.seed = seed;
            cmd_synth(synth, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace slz
