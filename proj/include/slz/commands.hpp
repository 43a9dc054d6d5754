#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/geometry.hpp"
#include "slz/labeled_tile.hpp"
#include "slz/metrics.hpp"
#include "slz/pipeline.hpp"
#include "slz/unet.hpp"

namespace slz {

/// Command-level failures caused by how the tool was invoked (exit code 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MaskFormat { color, ids };

struct TileCommand {
    std::filesystem::path in_dir;  ///< holds images/*.png and masks/<stem>.png
    std::filesystem::path out_dir;
    std::size_t tile_size = 256;
    std::size_t section_size = 0;
    std::string scheme = "model3";
    MaskFormat mask_format = MaskFormat::color;
    std::vector<std::string> augment;  ///< one augmented copy per tile when non-empty
    std::uint64_t seed = 0;
};

struct TileReport {
    std::size_t tiles = 0;
    std::vector<std::string> skipped;  ///< images without a mask
};

TileReport cmd_tile(const TileCommand& cmd, std::ostream& log);

struct TrainCommand {
    std::filesystem::path tiles;  ///< corpus manifest
    std::filesystem::path out_dir;
    std::string scheme = "model3";
    UNetConfig unet;
    std::size_t epochs = 1;
    std::size_t batch_size = 1;
    AdamHyper adam;
    std::optional<std::uint64_t> shuffle_seed;  ///< defaults to the init seed
    std::optional<std::uint8_t> ignore_label;
};

struct TrainReport {
    std::size_t steps = 0;
    double final_loss = 0.0;
    IouResult train_iou;
};

TrainReport cmd_train(const TrainCommand& cmd, std::ostream& log);

struct EvalCommand {
    std::optional<std::filesystem::path> checkpoint;
    bool oracle = false;  ///< predictions are the truth masks
    std::filesystem::path tiles;
    std::filesystem::path out_dir;
    std::string scheme = "model3";
};

using TilePredictor = std::function<Mask(const LabeledTile&)>;

/// Pools one confusion matrix over all tiles, then takes per-class IOU.
IouResult evaluate_tiles(const TilePredictor& predict, std::span<const LabeledTile> tiles,
                         std::size_t num_classes);

/// Writes the Table-1-style row: class columns in scheme order (the last is
/// "other"), then "mean". Undefined classes are left empty.
void write_iou_table(std::ostream& out, const ClassScheme& scheme, const IouResult& result);

IouResult cmd_eval(const EvalCommand& cmd, std::ostream& log);

struct DescendCommand {
    std::optional<std::filesystem::path> checkpoint;
    bool oracle = false;
    std::vector<std::filesystem::path> manifests;
    std::filesystem::path out_dir;
    std::string scheme = "model3";
    PipelineConfig pipeline;  ///< scheme field is filled from `scheme`
    CameraModel camera;
    DescentProfile profile;
};

struct DescendRun {
    std::string environment;
    std::string run;
    DescentResult result;
};

std::vector<DescendRun> cmd_descend(const DescendCommand& cmd, std::ostream& log);

struct ReportCommand {
    std::vector<std::filesystem::path> csv;
    std::filesystem::path out_dir;
    std::string x = "altitude_m";
    std::string y = "interframe_binary_iou";
    std::optional<std::string> group;
    bool average = false;  ///< mean of y over rows sharing (group, x)
    std::string title;
    std::string name;  ///< output file stem; defaults to "<y>_vs_<x>"
};

std::filesystem::path cmd_report(const ReportCommand& cmd, std::ostream& log);

struct SynthCommand {
    std::filesystem::path spec;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
};

/// Scene specs become images/ + masks/ pairs ready for `tile`; specs with a
/// `descent` block become frames/ plus descent.yaml.
void cmd_synth(const SynthCommand& cmd, std::ostream& log);

/// Axis label for a CSV column used as a chart axis.
std::string axis_label(const std::string& column);

}  // namespace slz
