#include "slz/synth.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace slz {

namespace {

double unit_noise(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

std::uint8_t shade(std::uint8_t base, double noise, double amplitude) {
    const double v = static_cast<double>(base) + amplitude * 255.0 * noise;
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool inside(const RegionShape& s, std::size_t x, std::size_t y) {
    switch (s.kind) {
        case ShapeKind::full:
            return true;
        case ShapeKind::rect: {
            const long px = static_cast<long>(x), py = static_cast<long>(y);
            return px >= s.x && py >= s.y && px < s.x + static_cast<long>(s.width) &&
                   py < s.y + static_cast<long>(s.height);
        }
        case ShapeKind::circle: {
            const double dx = static_cast<double>(x) + 0.5 - s.cx;
            const double dy = static_cast<double>(y) + 0.5 - s.cy;
            return dx * dx + dy * dy <= s.radius * s.radius;
        }
    }
    return false;
}

}  // namespace

SceneRenderer::SceneRenderer(SceneSpec spec, const Palette& palette, std::uint64_t seed)
    : spec_(std::move(spec)) {
    if (spec_.width == 0 || spec_.height == 0) throw std::invalid_argument("scene has zero size");
    if (spec_.frames == 0) throw std::invalid_argument("scene needs at least one frame");

    std::mt19937_64 rng(seed);
    const std::size_t w = spec_.width, h = spec_.height;
    std::vector<double> noise(w * h * 3);
    for (auto& n : noise) n = unit_noise(rng);

    background_.image = RgbImage(w, h);
    background_.mask = Mask(w, h);
    std::vector<bool> painted(w * h, false);
    for (const auto& region : spec_.regions) {
        const auto id = palette.id_of(region.base_class);
        const Rgb color = palette.classes[id].color;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                if (!inside(region.shape, x, y)) continue;
                const std::size_t i = y * w + x;
                painted[i] = true;
                background_.mask.cells[i] = id;
                background_.image.set(x, y,
                                      {shade(color[0], noise[i * 3], region.noise),
                                       shade(color[1], noise[i * 3 + 1], region.noise),
                                       shade(color[2], noise[i * 3 + 2], region.noise)});
            }
        }
    }
    if (const auto gap = std::find(painted.begin(), painted.end(), false); gap != painted.end()) {
        const auto i = static_cast<std::size_t>(gap - painted.begin());
        throw std::invalid_argument("scene regions leave pixel (" + std::to_string(i % w) + "," +
                                    std::to_string(i / w) + ") uncovered");
    }

    for (const auto& obj : spec_.moving_objects) {
        if (obj.width == 0 || obj.height == 0) throw std::invalid_argument("object has zero size");
        if (obj.enter_frame < spec_.frames) {
            const long steps = static_cast<long>(spec_.frames - 1 - obj.enter_frame);
            for (long s : {0L, steps}) {
                const long x = obj.x + obj.vx * s;
                const long y = obj.y + obj.vy * s;
                if (x < 0 || y < 0 || x + static_cast<long>(obj.width) > static_cast<long>(w) ||
                    y + static_cast<long>(obj.height) > static_cast<long>(h)) {
                    throw std::invalid_argument(
                        "moving object of class " + obj.base_class + " leaves the canvas at frame " +
                        std::to_string(obj.enter_frame + static_cast<std::size_t>(s)));
                }
            }
        }
        ObjectPaint paint;
        paint.id = palette.id_of(obj.base_class);
        paint.color = palette.classes[paint.id].color;
        paint.noise.resize(obj.width * obj.height * 3);
        for (auto& n : paint.noise) n = static_cast<float>(unit_noise(rng));
        objects_.push_back(std::move(paint));
    }
}

SceneFrame SceneRenderer::render(std::size_t frame) const {
    if (frame >= spec_.frames) {
        throw std::out_of_range("frame " + std::to_string(frame) + " beyond scene length " +
                                std::to_string(spec_.frames));
    }
    SceneFrame f = background_;
    for (std::size_t k = 0; k < spec_.moving_objects.size(); ++k) {
        const auto& obj = spec_.moving_objects[k];
        if (frame < obj.enter_frame) continue;
        const long steps = static_cast<long>(frame - obj.enter_frame);
        const auto ox = static_cast<std::size_t>(obj.x + obj.vx * steps);
        const auto oy = static_cast<std::size_t>(obj.y + obj.vy * steps);
        const auto& paint = objects_[k];
        for (std::size_t y = 0; y < obj.height; ++y) {
            for (std::size_t x = 0; x < obj.width; ++x) {
                const float* n = &paint.noise[(y * obj.width + x) * 3];
                f.mask.at(ox + x, oy + y) = paint.id;
                f.image.set(ox + x, oy + y,
                            {shade(paint.color[0], n[0], obj.noise),
                             shade(paint.color[1], n[1], obj.noise),
                             shade(paint.color[2], n[2], obj.noise)});
            }
        }
    }
    return f;
}

std::vector<SceneFrame> synth_scene(const SceneSpec& spec, const Palette& palette,
                                    std::uint64_t seed) {
    const SceneRenderer renderer(spec, palette, seed);
    std::vector<SceneFrame> frames;
    frames.reserve(spec.frames);
    for (std::size_t i = 0; i < spec.frames; ++i) frames.push_back(renderer.render(i));
    return frames;
}

SceneSpec parse_scene_spec(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("scene spec: ") + e.what());
    }
    SceneSpec spec;
    try {
        spec.width = root["width"].as<std::size_t>(spec.width);
        spec.height = root["height"].as<std::size_t>(spec.height);
        spec.frames = root["frames"].as<std::size_t>(spec.frames);
        for (const auto& r : root["regions"]) {
            SceneRegion region;
            region.base_class = r["class"].as<std::string>();
            region.noise = r["noise"].as<double>(region.noise);
            const auto shape = r["shape"].as<std::string>("full");
            if (shape == "full") {
                region.shape.kind = ShapeKind::full;
            } else if (shape == "rect") {
                region.shape.kind = ShapeKind::rect;
                region.shape.x = r["x"].as<long>();
                region.shape.y = r["y"].as<long>();
                region.shape.width = r["w"].as<std::size_t>();
                region.shape.height = r["h"].as<std::size_t>();
            } else if (shape == "circle") {
                region.shape.kind = ShapeKind::circle;
                region.shape.cx = r["cx"].as<double>();
                region.shape.cy = r["cy"].as<double>();
                region.shape.radius = r["r"].as<double>();
            } else {
                throw std::invalid_argument("scene spec: unknown region shape '" + shape + "'");
            }
            spec.regions.push_back(std::move(region));
        }
        for (const auto& o : root["moving_objects"]) {
            MovingObject obj;
            obj.base_class = o["class"].as<std::string>();
            obj.x = o["x"].as<long>();
            obj.y = o["y"].as<long>();
            obj.width = o["w"].as<std::size_t>();
            obj.height = o["h"].as<std::size_t>();
            obj.vx = o["vx"].as<long>(0);
            obj.vy = o["vy"].as<long>(0);
            obj.enter_frame = o["enter_frame"].as<std::size_t>(0);
            obj.noise = o["noise"].as<double>(obj.noise);
            spec.moving_objects.push_back(std::move(obj));
        }
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("scene spec: ") + e.what());
    }
    return spec;
}

}  // namespace slz
