#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "slz/tensor.hpp"

namespace slz {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB image, interleaved, row-major.
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

    Rgb pixel(std::size_t x, std::size_t y) const {
        const std::size_t i = (y * width + x) * 3;
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(std::size_t x, std::size_t y, Rgb c) {
        const std::size_t i = (y * width + x) * 3;
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }

    bool operator==(const RgbImage&) const = default;
};

/// 8-bit channels divided by 255 into a [3,H,W] tensor. No mean-centering.
Tensor<float> to_tensor(const RgbImage& image);

/// Inverse of to_tensor, rounding and clamping to [0,255].
RgbImage to_rgb(const Tensor<float>& chw);

}  // namespace slz
