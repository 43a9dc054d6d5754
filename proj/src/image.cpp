#include <algorithm>
#include <cmath>

#include "slz/image.hpp"
#include "slz/mask.hpp"
#include "slz/resample.hpp"

namespace slz {

std::vector<std::size_t> histogram(const Mask& mask, std::size_t bins) {
    std::vector<std::size_t> h(bins, 0);
    for (auto id : mask.cells) {
        if (id >= h.size()) h.resize(id + 1, 0);
        ++h[id];
    }
    return h;
}

Tensor<float> to_tensor(const RgbImage& image) {
    Tensor<float> t({3, image.height, image.width});
    const std::size_t plane = image.width * image.height;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            t[c * plane + i] = static_cast<float>(image.rgb[i * 3 + c]) / 255.0f;
        }
    }
    return t;
}

RgbImage to_rgb(const Tensor<float>& chw) {
    require_chw(chw, "to_rgb");
    if (chw.dim(0) != 3) throw std::invalid_argument("to_rgb: expected 3 channels");
    RgbImage img(chw.dim(2), chw.dim(1));
    const std::size_t plane = img.width * img.height;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const float v = std::clamp(chw[c * plane + i] * 255.0f, 0.0f, 255.0f);
            img.rgb[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return img;
}

Window centered_window(std::size_t width, std::size_t height, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("window fraction must lie in (0, 1]");
    }
    const auto side = [fraction](std::size_t n) {
        return std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);
    };
    Window w;
    w.width = side(width);
    w.height = side(height);
    w.x = (width - w.width) / 2;
    w.y = (height - w.height) / 2;
    return w;
}

namespace {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    float frac;
};

// Sample positions along one axis: centers aligned, clamped to the window.
std::vector<Tap> taps(std::size_t origin, std::size_t extent, std::size_t out) {
    std::vector<Tap> result(out);
    const double scale = static_cast<double>(extent) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        double u = (static_cast<double>(i) + 0.5) * scale - 0.5;
        u = std::clamp(u, 0.0, static_cast<double>(extent - 1));
        const auto lo = static_cast<std::size_t>(std::floor(u));
        const std::size_t hi = std::min(lo + 1, extent - 1);
        result[i] = {origin + lo, origin + hi, static_cast<float>(u - static_cast<double>(lo))};
    }
    return result;
}

void check_window(std::size_t w, std::size_t h, const Window& window) {
    if (window.width == 0 || window.height == 0 || window.x + window.width > w ||
        window.y + window.height > h) {
        throw std::invalid_argument("crop window exceeds raster bounds");
    }
}

}  // namespace

RgbImage crop_resize_bilinear(const RgbImage& src, const Window& window, std::size_t out_w,
                              std::size_t out_h) {
    check_window(src.width, src.height, window);
    const auto tx = taps(window.x, window.width, out_w);
    const auto ty = taps(window.y, window.height, out_h);
    RgbImage out(out_w, out_h);
    for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const Rgb a = src.pixel(tx[x].lo, ty[y].lo);
            const Rgb b = src.pixel(tx[x].hi, ty[y].lo);
            const Rgb c = src.pixel(tx[x].lo, ty[y].hi);
            const Rgb d = src.pixel(tx[x].hi, ty[y].hi);
            const float fx = tx[x].frac;
            const float fy = ty[y].frac;
            Rgb p;
            for (std::size_t k = 0; k < 3; ++k) {
                const float top = a[k] + (b[k] - a[k]) * fx;
                const float bottom = c[k] + (d[k] - c[k]) * fx;
                p[k] = static_cast<std::uint8_t>(
                    std::clamp(std::lround(top + (bottom - top) * fy), 0L, 255L));
            }
            out.set(x, y, p);
        }
    }
    return out;
}

Tensor<float> crop_resize_bilinear(const Tensor<float>& src, const Window& window,
                                   std::size_t out_w, std::size_t out_h) {
    require_chw(src, "crop_resize_bilinear");
    check_window(src.dim(2), src.dim(1), window);
    const auto tx = taps(window.x, window.width, out_w);
    const auto ty = taps(window.y, window.height, out_h);
    Tensor<float> out({src.dim(0), out_h, out_w});
    for (std::size_t c = 0; c < src.dim(0); ++c) {
        for (std::size_t y = 0; y < out_h; ++y) {
            for (std::size_t x = 0; x < out_w; ++x) {
                const float a = src.at(c, ty[y].lo, tx[x].lo);
                const float b = src.at(c, ty[y].lo, tx[x].hi);
                const float cc = src.at(c, ty[y].hi, tx[x].lo);
                const float d = src.at(c, ty[y].hi, tx[x].hi);
                const float top = a + (b - a) * tx[x].frac;
                const float bottom = cc + (d - cc) * tx[x].frac;
                out.at(c, y, x) = top + (bottom - top) * ty[y].frac;
            }
        }
    }
    return out;
}

RgbImage crop(const RgbImage& src, const Window& window) {
    check_window(src.width, src.height, window);
    RgbImage out(window.width, window.height);
    for (std::size_t y = 0; y < window.height; ++y) {
        const auto* row = src.rgb.data() + ((window.y + y) * src.width + window.x) * 3;
        std::copy(row, row + window.width * 3, out.rgb.data() + y * window.width * 3);
    }
    return out;
}

Tensor<float> crop(const Tensor<float>& src, const Window& window) {
    require_chw(src, "crop");
    check_window(src.dim(2), src.dim(1), window);
    Tensor<float> out({src.dim(0), window.height, window.width});
    for (std::size_t c = 0; c < src.dim(0); ++c) {
        for (std::size_t y = 0; y < window.height; ++y) {
            const float* row = &src.at(c, window.y + y, window.x);
            std::copy(row, row + window.width, &out.at(c, y, 0));
        }
    }
    return out;
}

}  // namespace slz
