#pragma once

#include <filesystem>

#include "slz/image.hpp"
#include "slz/mask.hpp"

namespace slz {

/// 8-bit PNG read; gray and palette images are expanded, alpha is dropped.
RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

/// Single-channel 8-bit PNG holding class IDs.
Mask read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const Mask& mask);

}  // namespace slz
