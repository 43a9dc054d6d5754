#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/labeled_tile.hpp"
#include "slz/pipeline.hpp"

namespace slz {

// Tile corpus manifest (corpus.yaml):
//   scheme: model3
//   num_classes: 5
//   classes: [grass, paved, water, roof, other]
//   tile_size: 256
//   tiles:
//     - {image: tiles/000000_image.png, mask: tiles/000000_mask.png,
//        source: scene, grid_x: 0, grid_y: 0, x: 0, y: 0, footprint: 256}
// Paths are relative to the manifest. Masks are single-channel PNGs holding
// output-class IDs.

struct CorpusEntry {
    std::string image;
    std::string mask;
    TileOrigin origin;
};

struct Corpus {
    std::string scheme;
    std::size_t num_classes = 0;
    std::vector<std::string> classes;
    std::size_t tile_size = 0;
    std::vector<CorpusEntry> entries;
};

void write_corpus_manifest(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus_manifest(const std::filesystem::path& path);

/// Loads every tile of the manifest at `path`; mask IDs are range-checked.
std::vector<LabeledTile> load_corpus_tiles(const std::filesystem::path& path, const Corpus& corpus);

// Descent manifest (descent.yaml):
//   environment: park
//   landing_frame: 300        # optional; used when a frame has no altitude
//   drop_per_frame: 0.1       # optional
//   initial_mask: frames/000000_mask.png   # optional
//   frames:
//     - {index: 0, altitude_m: 30.0, image: frames/000000.png, mask: frames/000000_mask.png}
// Masks hold base-palette IDs.

struct ManifestFrame {
    std::size_t index = 0;
    std::optional<double> altitude_m;
    std::string image;
    std::optional<std::string> mask;
};

struct DescentManifest {
    std::string environment = "default";
    std::optional<std::size_t> landing_frame;
    std::optional<double> drop_per_frame;
    std::optional<std::string> initial_mask;
    std::vector<ManifestFrame> frames;
};

void write_descent_manifest(const std::filesystem::path& path, const DescentManifest& manifest);
DescentManifest read_descent_manifest(const std::filesystem::path& path);

/// Reads manifest frames lazily from disk. Altitudes missing from the
/// manifest come from `profile`; masks are remapped to `scheme`.
class ManifestFrames final : public FrameSource {
public:
    ManifestFrames(std::filesystem::path base_dir, DescentManifest manifest, ClassScheme scheme,
                   DescentProfile profile);
    std::size_t size() const override { return manifest_.frames.size(); }
    FrameRecord load(std::size_t position) const override;
    double altitude(std::size_t position) const;
    const DescentManifest& manifest() const { return manifest_; }
    /// Initial ground truth (output-class IDs): initial_mask, else the first frame's mask.
    std::optional<Mask> initial_truth() const;

private:
    std::filesystem::path base_;
    DescentManifest manifest_;
    ClassScheme scheme_;
    DescentProfile profile_;
};

}  // namespace slz
