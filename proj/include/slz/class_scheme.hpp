#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "slz/image.hpp"
#include "slz/mask.hpp"

namespace slz {

struct PaletteEntry {
    std::string name;
    Rgb color;
};

/// Base-class palette; the entry index is the base-class ID.
struct Palette {
    std::vector<PaletteEntry> classes;

    std::size_t size() const { return classes.size(); }
    /// Throws std::invalid_argument for an unknown name.
    std::uint8_t id_of(std::string_view name) const;
};

Palette parse_palette(const std::string& yaml_text);
Palette load_palette(const std::filesystem::path& path);

/// Mapping from the base palette to a reduced set of output classes, plus
/// the subset of outputs that count as safe landing ground.
struct ClassScheme {
    std::string name;
    std::vector<std::string> base_classes;
    std::vector<std::uint8_t> merge_map;  ///< base ID -> output ID, total
    std::vector<std::string> output_classes;
    std::vector<std::uint8_t> safe_set;  ///< sorted output IDs

    std::size_t num_classes() const { return output_classes.size(); }
    std::uint8_t output_id(std::string_view name) const;
    bool is_safe(std::uint8_t output_id) const;
};

ClassScheme parse_scheme(const std::string& yaml_text, const Palette& palette);
ClassScheme load_scheme(const std::filesystem::path& path, const Palette& palette);

/// Directory holding palette.yaml and schemes/. Uses $SLZ_DATA_DIR when set,
/// otherwise the source-tree data directory baked in at build time.
std::filesystem::path data_dir();
Palette default_palette();

/// Loads a built-in scheme ("model1", "model2", "model3") or, if `name_or_path`
/// names an existing file, that file.
ClassScheme scheme_by_name(const std::string& name_or_path, const Palette& palette);

/// Exact color -> base-ID decoding. Unknown colors raise std::invalid_argument
/// naming the color and the pixel.
Mask decode_palette_mask(const RgbImage& color_mask, const Palette& palette);
RgbImage encode_palette_mask(const Mask& mask, const Palette& palette);

/// Applies scheme.merge_map to a mask of base IDs.
Mask remap(const Mask& base_mask, const ClassScheme& scheme);

}  // namespace slz
