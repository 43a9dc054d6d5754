#include "slz/descent_sim.hpp"

#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace slz {

namespace {

DescentSimSpec normalized(DescentSimSpec spec) {
    if (spec.scene.frames == 0) throw std::invalid_argument("descent needs at least one frame");
    if (spec.frame_size == 0) throw std::invalid_argument("frame size must be positive");
    if (spec.scene.width != spec.scene.height) {
        throw std::invalid_argument("descent canvas must be square");
    }
    if (spec.profile.landing_frame == 0) spec.profile.landing_frame = spec.scene.frames;
    if (spec.profile.landing_frame < spec.scene.frames - 1) {
        throw std::invalid_argument("landing frame precedes the last descent frame");
    }
    spec.profile.validate();
    return spec;
}

}  // namespace

SyntheticDescent::SyntheticDescent(DescentSimSpec spec, const Palette& palette, std::uint64_t seed)
    : spec_(normalized(std::move(spec))), renderer_(spec_.scene, palette, seed) {}

double SyntheticDescent::altitude(std::size_t frame) const {
    return altitude_at(spec_.profile, frame);
}

Window SyntheticDescent::canvas_window(std::size_t frame) const {
    const double h0 = altitude(0);
    const double h = altitude(frame);
    return centered_window(spec_.scene.width, spec_.scene.height, h / h0);
}

DescentFrame SyntheticDescent::render(std::size_t frame) const {
    if (frame >= size()) throw std::out_of_range("descent frame out of range");
    const SceneFrame canvas = renderer_.render(frame);
    const Window w = canvas_window(frame);
    DescentFrame f;
    f.frame_index = frame;
    f.altitude_m = altitude(frame);
    f.image = crop_resize_bilinear(canvas.image, w, spec_.frame_size, spec_.frame_size);
    f.mask = crop_resize_nearest(canvas.mask, w, spec_.frame_size, spec_.frame_size);
    return f;
}

FrameRecord SyntheticFrames::load(std::size_t position) const {
    DescentFrame f = descent_.render(position);
    FrameRecord r;
    r.frame_index = f.frame_index;
    r.altitude_m = f.altitude_m;
    r.image = to_tensor(f.image);
    r.truth = remap(f.mask, scheme_);
    return r;
}

DescentSimSpec parse_descent_sim_spec(const std::string& yaml_text) {
    DescentSimSpec spec;
    spec.scene = parse_scene_spec(yaml_text);
    try {
        const YAML::Node d = YAML::Load(yaml_text)["descent"];
        if (d) {
            spec.frame_size = d["frame_size"].as<std::size_t>(spec.frame_size);
            spec.profile.fps = d["fps"].as<double>(spec.profile.fps);
            if (d["descent_rate_mps"]) {
                spec.profile.descent_rate_mps = d["descent_rate_mps"].as<double>();
                spec.profile.drop_per_frame.reset();
            }
            if (d["drop_per_frame"]) spec.profile.drop_per_frame = d["drop_per_frame"].as<double>();
            spec.profile.landing_frame = d["landing_frame"].as<std::size_t>(0);
            spec.environment = d["environment"].as<std::string>(spec.environment);
        }
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("descent spec: ") + e.what());
    }
    return spec;
}

}  // namespace slz
