#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace slz {

/// Row-major 2D raster of cells.
template <typename T>
struct Grid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<T> cells;

    Grid() = default;
    Grid(std::size_t w, std::size_t h, T fill = T{}) : width(w), height(h), cells(w * h, fill) {}

    T& at(std::size_t x, std::size_t y) { return cells[y * width + x]; }
    const T& at(std::size_t x, std::size_t y) const { return cells[y * width + x]; }
    std::size_t area() const { return width * height; }

    bool operator==(const Grid&) const = default;
};

/// Per-pixel class IDs (base-palette IDs or scheme output IDs, depending on stage).
struct Mask : Grid<std::uint8_t> {
    using Grid::Grid;
};

/// Per-pixel landing safety: 1 = safe, 0 = unsafe.
struct SafetyMask : Grid<std::uint8_t> {
    using Grid::Grid;
    bool safe(std::size_t x, std::size_t y) const { return at(x, y) != 0; }
};

/// Histogram of IDs; result has max(bins, max_id + 1) entries.
std::vector<std::size_t> histogram(const Mask& mask, std::size_t bins = 0);

}  // namespace slz
