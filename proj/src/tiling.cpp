#include "slz/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "slz/resample.hpp"

namespace slz {

std::vector<std::size_t> tile_anchors(std::size_t extent, std::size_t section) {
    if (section == 0) throw std::invalid_argument("tile size must be positive");
    if (extent < section) {
        throw std::invalid_argument("image side " + std::to_string(extent) +
                                    " is smaller than the tile size " + std::to_string(section));
    }
    const std::size_t count = (extent + section - 1) / section;
    std::vector<std::size_t> anchors(count);
    for (std::size_t i = 0; i + 1 < count; ++i) anchors[i] = i * section;
    anchors.back() = extent - section;
    return anchors;
}

std::vector<LabeledTile> tile(const RgbImage& image, const Mask& mask, const TileOptions& options,
                              const std::string& source_id) {
    if (image.width != mask.width || image.height != mask.height) {
        throw std::invalid_argument("tile: image " + std::to_string(image.width) + "x" +
                                    std::to_string(image.height) + " and mask " +
                                    std::to_string(mask.width) + "x" +
                                    std::to_string(mask.height) + " differ in size");
    }
    const std::size_t out = options.tile_size;
    const std::size_t section = options.section_size == 0 ? out : options.section_size;
    const auto xs = tile_anchors(image.width, section);
    const auto ys = tile_anchors(image.height, section);

    std::vector<LabeledTile> tiles;
    tiles.reserve(xs.size() * ys.size());
    for (std::size_t gy = 0; gy < ys.size(); ++gy) {
        for (std::size_t gx = 0; gx < xs.size(); ++gx) {
            const Window w{xs[gx], ys[gy], section, section};
            LabeledTile t;
            if (section == out) {
                t.image = to_tensor(crop(image, w));
                t.mask = crop(mask, w);
            } else {
                t.image = to_tensor(crop_resize_bilinear(image, w, out, out));
                t.mask = crop_resize_nearest(mask, w, out, out);
            }
            t.origin = {source_id, gx, gy, xs[gx], ys[gy], section};
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

AugmentOp parse_augment_op(std::string_view name) {
    if (name == "horizontal_flip") return {AugmentKind::horizontal_flip, 1};
    if (name == "brightness_jitter") return {AugmentKind::brightness_jitter, 1};
    if (name == "rescale") return {AugmentKind::rescale, 1};
    if (name == "rotate90") return {AugmentKind::rotate90, 1};
    if (name.starts_with("rotate90:") && name.size() == 10 && name[9] >= '0' && name[9] <= '3') {
        return {AugmentKind::rotate90, name[9] - '0'};
    }
    throw std::invalid_argument("unsupported augmentation '" + std::string(name) + "'");
}

namespace {

// Destination (x, y) takes source pixel src(x, y) for a pure permutation.
template <typename Fn>
LabeledTile permute(const LabeledTile& in, std::size_t out_w, std::size_t out_h, Fn src) {
    LabeledTile out;
    out.origin = in.origin;
    const std::size_t channels = in.image.dim(0);
    out.image = Tensor<float>({channels, out_h, out_w});
    out.mask = Mask(out_w, out_h);
    for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto [sx, sy] = src(x, y);
            out.mask.at(x, y) = in.mask.at(sx, sy);
            for (std::size_t c = 0; c < channels; ++c) out.image.at(c, y, x) = in.image.at(c, sy, sx);
        }
    }
    return out;
}

LabeledTile rotate_once(const LabeledTile& in) {
    // Counter-clockwise: destination (x, y) <- source (w - 1 - y, x).
    const std::size_t w = in.mask.width;
    const std::size_t h = in.mask.height;
    return permute(in, h, w, [w](std::size_t x, std::size_t y) {
        return std::pair{w - 1 - y, x};
    });
}

LabeledTile rescale(const LabeledTile& in, double factor) {
    // Zoom about the center; samples outside the source clamp to the border.
    const std::size_t w = in.mask.width;
    const std::size_t h = in.mask.height;
    const double cx = 0.5 * static_cast<double>(w);
    const double cy = 0.5 * static_cast<double>(h);
    LabeledTile out;
    out.origin = in.origin;
    const std::size_t channels = in.image.dim(0);
    out.image = Tensor<float>({channels, h, w});
    out.mask = Mask(w, h);
    const auto clamp_index = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
    };
    for (std::size_t y = 0; y < h; ++y) {
        const double sy = (static_cast<double>(y) + 0.5 - cy) / factor + cy - 0.5;
        const double fy0 = std::floor(sy);
        const auto y0 = clamp_index(fy0, h);
        const auto y1 = clamp_index(fy0 + 1, h);
        const auto wy = static_cast<float>(std::clamp(sy - fy0, 0.0, 1.0));
        for (std::size_t x = 0; x < w; ++x) {
            const double sx = (static_cast<double>(x) + 0.5 - cx) / factor + cx - 0.5;
            const double fx0 = std::floor(sx);
            const auto x0 = clamp_index(fx0, w);
            const auto x1 = clamp_index(fx0 + 1, w);
            const auto wx = static_cast<float>(std::clamp(sx - fx0, 0.0, 1.0));
            out.mask.at(x, y) = in.mask.at(clamp_index(std::floor(sx + 0.5), w),
                                           clamp_index(std::floor(sy + 0.5), h));
            for (std::size_t c = 0; c < channels; ++c) {
                const float top = in.image.at(c, y0, x0) +
                                  (in.image.at(c, y0, x1) - in.image.at(c, y0, x0)) * wx;
                const float bottom = in.image.at(c, y1, x0) +
                                     (in.image.at(c, y1, x1) - in.image.at(c, y1, x0)) * wx;
                out.image.at(c, y, x) = top + (bottom - top) * wy;
            }
        }
    }
    return out;
}

}  // namespace

LabeledTile augment(const LabeledTile& tile, std::span<const AugmentOp> ops, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    LabeledTile t = tile;
    for (const auto& op : ops) {
        switch (op.kind) {
            case AugmentKind::horizontal_flip: {
                const std::size_t w = t.mask.width;
                t = permute(t, w, t.mask.height,
                            [w](std::size_t x, std::size_t y) { return std::pair{w - 1 - x, y}; });
                break;
            }
            case AugmentKind::rotate90:
                for (int i = 0; i < (op.quarter_turns % 4 + 4) % 4; ++i) t = rotate_once(t);
                break;
            case AugmentKind::brightness_jitter: {
                const float gain =
                    1.0f + kMaxBrightnessJitter * static_cast<float>(2.0 * unit() - 1.0);
                for (auto& v : t.image.values()) v = std::clamp(v * gain, 0.0f, 1.0f);
                break;
            }
            case AugmentKind::rescale: {
                // Log-uniform over [kMinRescale, kMaxRescale].
                const double lo = std::log(kMinRescale);
                const double hi = std::log(kMaxRescale);
                t = rescale(t, std::exp(lo + (hi - lo) * unit()));
                break;
            }
        }
    }
    return t;
}

}  // namespace slz
