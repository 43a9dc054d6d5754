#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/image.hpp"
#include "slz/mask.hpp"

namespace slz {

enum class ShapeKind { full, rect, circle };

struct RegionShape {
    ShapeKind kind = ShapeKind::full;
    long x = 0, y = 0;               ///< rect top-left
    std::size_t width = 0, height = 0;  ///< rect size
    double cx = 0, cy = 0, radius = 0;  ///< circle
};

/// A painted region; later regions overwrite earlier ones.
struct SceneRegion {
    RegionShape shape;
    std::string base_class;
    double noise = 0.06;  ///< texture amplitude as a fraction of full scale
};

/// Axis-aligned object that appears at `enter_frame` and moves by an integer
/// velocity every frame.
struct MovingObject {
    long x = 0, y = 0;
    std::size_t width = 1, height = 1;
    long vx = 0, vy = 0;
    std::string base_class;
    std::size_t enter_frame = 0;
    double noise = 0.06;
};

struct SceneSpec {
    std::size_t width = 256;
    std::size_t height = 256;
    std::size_t frames = 1;
    std::vector<SceneRegion> regions;
    std::vector<MovingObject> moving_objects;
};

/// One rendered frame; the mask holds base-palette IDs and is exact.
struct SceneFrame {
    RgbImage image;
    Mask mask;
};

/// Renders frames of a procedural scene on demand. Construction validates the
/// spec: regions must cover the whole canvas and objects must stay inside it
/// for every frame in which they are visible.
class SceneRenderer {
public:
    SceneRenderer(SceneSpec spec, const Palette& palette, std::uint64_t seed);

    const SceneSpec& spec() const { return spec_; }
    std::size_t frame_count() const { return spec_.frames; }
    SceneFrame render(std::size_t frame) const;

private:
    struct ObjectPaint {
        Rgb color;
        std::uint8_t id;
        std::vector<float> noise;  // width * height * 3, in [-1, 1]
    };

    SceneSpec spec_;
    SceneFrame background_;
    std::vector<ObjectPaint> objects_;
};

std::vector<SceneFrame> synth_scene(const SceneSpec& spec, const Palette& palette,
                                    std::uint64_t seed);

/// Reads the scene keys (width, height, frames, regions, moving_objects) of a
/// YAML document; other keys are ignored.
SceneSpec parse_scene_spec(const std::string& yaml_text);

}  // namespace slz
