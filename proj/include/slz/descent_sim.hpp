#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "slz/class_scheme.hpp"
#include "slz/geometry.hpp"
#include "slz/image.hpp"
#include "slz/mask.hpp"
#include "slz/pipeline.hpp"
#include "slz/resample.hpp"
#include "slz/synth.hpp"

namespace slz {

/// A nadir descent over a synthetic scene. The scene canvas is the ground
/// footprint of frame 0; frame k shows the centered part of the canvas that
/// the camera covers at altitude h_k, resampled to frame_size.
struct DescentSimSpec {
    SceneSpec scene;  ///< scene.frames is the number of descent frames
    std::size_t frame_size = 256;
    DescentProfile profile;  ///< landing_frame 0 means "one past the last frame"
    std::string environment = "synthetic";
};

struct DescentFrame {
    std::size_t frame_index = 0;
    double altitude_m = 0.0;
    RgbImage image;
    Mask mask;  ///< base-palette IDs
};

class SyntheticDescent {
public:
    SyntheticDescent(DescentSimSpec spec, const Palette& palette, std::uint64_t seed);

    const DescentSimSpec& spec() const { return spec_; }
    std::size_t size() const { return spec_.scene.frames; }
    double altitude(std::size_t frame) const;
    /// Canvas region visible in `frame`.
    Window canvas_window(std::size_t frame) const;
    DescentFrame render(std::size_t frame) const;

private:
    DescentSimSpec spec_;
    SceneRenderer renderer_;
};

/// Adapts a synthetic descent to the pipeline; truth is remapped to `scheme`.
class SyntheticFrames final : public FrameSource {
public:
    SyntheticFrames(const SyntheticDescent& descent, ClassScheme scheme)
        : descent_(descent), scheme_(std::move(scheme)) {}
    std::size_t size() const override { return descent_.size(); }
    FrameRecord load(std::size_t position) const override;

private:
    const SyntheticDescent& descent_;
    ClassScheme scheme_;
};

/// Scene keys plus an optional `descent` block (frame_size, fps,
/// descent_rate_mps, drop_per_frame, landing_frame, environment).
DescentSimSpec parse_descent_sim_spec(const std::string& yaml_text);

}  // namespace slz
