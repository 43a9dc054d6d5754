#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slz/image.hpp"
#include "slz/labeled_tile.hpp"
#include "slz/mask.hpp"

namespace slz {

struct TileOptions {
    std::size_t tile_size = 256;
    /// Side of the source section cut before resizing to tile_size.
    /// 0 means cut at tile_size directly (no resampling).
    std::size_t section_size = 0;
};

/// Section origins along one axis: a regular grid from 0, with the last
/// section pulled flush against the far edge so every pixel is covered.
std::vector<std::size_t> tile_anchors(std::size_t extent, std::size_t section);

/// Cuts `image` and `mask` into aligned tiles in grid-major (row, then
/// column) order. Images are resized bilinearly and masks nearest-neighbor
/// when section_size differs from tile_size.
std::vector<LabeledTile> tile(const RgbImage& image, const Mask& mask, const TileOptions& options,
                              const std::string& source_id = "image");

enum class AugmentKind { horizontal_flip, rotate90, brightness_jitter, rescale };

struct AugmentOp {
    AugmentKind kind = AugmentKind::horizontal_flip;
    int quarter_turns = 1;  ///< rotate90 only, counter-clockwise
};

/// Accepts "horizontal_flip", "rotate90" or "rotate90:k", "brightness_jitter",
/// "rescale". Anything else raises std::invalid_argument.
AugmentOp parse_augment_op(std::string_view name);

inline constexpr double kMinRescale = 0.8;
inline constexpr double kMaxRescale = 1.25;
inline constexpr float kMaxBrightnessJitter = 0.2f;

/// Applies `ops` in order. Geometric ops move image and mask together;
/// brightness jitter only scales the image. Random draws come from `seed`.
LabeledTile augment(const LabeledTile& tile, std::span<const AugmentOp> ops, std::uint64_t seed);

}  // namespace slz
