#pragma once

#include <cstddef>
#include <stdexcept>

#include "slz/image.hpp"
#include "slz/mask.hpp"
#include "slz/tensor.hpp"

namespace slz {

/// Axis-aligned pixel window inside a raster.
struct Window {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t width = 0;
    std::size_t height = 0;

    std::size_t area() const { return width * height; }
    bool operator==(const Window&) const = default;
};

/// Centered window covering `fraction` of each side, rounded to the nearest
/// pixel (at least 1). Offsets are floor((side - window) / 2).
Window centered_window(std::size_t width, std::size_t height, double fraction);

/// Nearest-neighbor sample of `window` into an out_w x out_h raster.
/// Source index = window origin + floor((dst + 0.5) * window / out).
template <typename G>
G crop_resize_nearest(const G& src, const Window& window, std::size_t out_w, std::size_t out_h) {
    if (window.x + window.width > src.width || window.y + window.height > src.height ||
        window.width == 0 || window.height == 0) {
        throw std::invalid_argument("crop window exceeds raster bounds");
    }
    G out(out_w, out_h);
    for (std::size_t y = 0; y < out_h; ++y) {
        const std::size_t sy = window.y + (2 * y + 1) * window.height / (2 * out_h);
        for (std::size_t x = 0; x < out_w; ++x) {
            const std::size_t sx = window.x + (2 * x + 1) * window.width / (2 * out_w);
            out.at(x, y) = src.at(sx, sy);
        }
    }
    return out;
}

/// Bilinear sample with pixel-center alignment and edge clamping.
RgbImage crop_resize_bilinear(const RgbImage& src, const Window& window, std::size_t out_w,
                              std::size_t out_h);
Tensor<float> crop_resize_bilinear(const Tensor<float>& src, const Window& window,
                                   std::size_t out_w, std::size_t out_h);

/// Plain crop (no resampling).
template <typename G>
G crop(const G& src, const Window& window) {
    return crop_resize_nearest(src, window, window.width, window.height);
}
RgbImage crop(const RgbImage& src, const Window& window);
Tensor<float> crop(const Tensor<float>& src, const Window& window);

}  // namespace slz
