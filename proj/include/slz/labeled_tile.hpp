#pragma once

#include <cstddef>
#include <string>

#include "slz/mask.hpp"
#include "slz/tensor.hpp"

namespace slz {

struct TileOrigin {
    std::string source_id;
    std::size_t grid_x = 0;  ///< column index in the tile grid
    std::size_t grid_y = 0;  ///< row index in the tile grid
    std::size_t pixel_x = 0;  ///< left edge of the footprint in source pixels
    std::size_t pixel_y = 0;
    std::size_t footprint = 0;  ///< side of the source footprint before any rescale
};

/// Training sample: [3,H,W] image in [0,1] with a spatially aligned mask of
/// scheme output-class IDs.
struct LabeledTile {
    Tensor<float> image;
    Mask mask;
    TileOrigin origin;
};

}  // namespace slz
