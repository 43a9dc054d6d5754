#include "slz/class_scheme.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#ifndef SLZ_DEFAULT_DATA_DIR
#define SLZ_DEFAULT_DATA_DIR "data"
#endif

namespace slz {

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

YAML::Node parse_yaml(const std::string& text, const char* what) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string(what) + ": " + e.what());
    }
}

std::uint32_t color_key(Rgb c) {
    return (std::uint32_t{c[0]} << 16) | (std::uint32_t{c[1]} << 8) | c[2];
}

}  // namespace

std::uint8_t Palette::id_of(std::string_view name) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].name == name) return static_cast<std::uint8_t>(i);
    }
    throw std::invalid_argument("unknown base class '" + std::string(name) + "'");
}

Palette parse_palette(const std::string& yaml_text) {
    const auto root = parse_yaml(yaml_text, "palette");
    const auto list = root["classes"];
    if (!list || !list.IsSequence() || list.size() == 0) {
        throw std::invalid_argument("palette: expected a non-empty 'classes' list");
    }
    if (list.size() > 255) throw std::invalid_argument("palette: at most 255 classes");
    Palette p;
    std::map<std::uint32_t, std::string> seen;
    for (const auto& node : list) {
        PaletteEntry e;
        e.name = node["name"].as<std::string>();
        const auto rgb = node["color"].as<std::vector<int>>();
        if (rgb.size() != 3 || std::any_of(rgb.begin(), rgb.end(),
                                           [](int v) { return v < 0 || v > 255; })) {
            throw std::invalid_argument("palette: class '" + e.name +
                                        "' needs an [r, g, b] color in 0..255");
        }
        e.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                   static_cast<std::uint8_t>(rgb[2])};
        if (auto [it, fresh] = seen.emplace(color_key(e.color), e.name); !fresh) {
            throw std::invalid_argument("palette: classes '" + it->second + "' and '" + e.name +
                                        "' share a color");
        }
        p.classes.push_back(std::move(e));
    }
    return p;
}

Palette load_palette(const std::filesystem::path& path) { return parse_palette(read_text(path)); }

std::uint8_t ClassScheme::output_id(std::string_view name) const {
    const auto it = std::find(output_classes.begin(), output_classes.end(), name);
    if (it == output_classes.end()) {
        throw std::invalid_argument("scheme " + this->name + " has no output class '" +
                                    std::string(name) + "'");
    }
    return static_cast<std::uint8_t>(it - output_classes.begin());
}

bool ClassScheme::is_safe(std::uint8_t id) const {
    return std::binary_search(safe_set.begin(), safe_set.end(), id);
}

ClassScheme parse_scheme(const std::string& yaml_text, const Palette& palette) {
    const auto root = parse_yaml(yaml_text, "scheme");
    ClassScheme s;
    s.name = root["name"] ? root["name"].as<std::string>() : std::string("unnamed");
    if (!root["output_classes"] || !root["merge"]) {
        throw std::invalid_argument("scheme " + s.name + ": needs output_classes and merge");
    }
    s.output_classes = root["output_classes"].as<std::vector<std::string>>();
    if (s.output_classes.size() < 2 || s.output_classes.size() > 255) {
        throw std::invalid_argument("scheme " + s.name + ": needs 2..255 output classes");
    }
    for (const auto& entry : palette.classes) s.base_classes.push_back(entry.name);

    const auto merge = root["merge"];
    s.merge_map.assign(palette.size(), 0);
    std::vector<bool> mapped(palette.size(), false);
    for (const auto& kv : merge) {
        const auto base = kv.first.as<std::string>();
        const auto target = kv.second.as<std::string>();
        const auto base_id = palette.id_of(base);
        s.merge_map[base_id] = s.output_id(target);
        mapped[base_id] = true;
    }
    for (std::size_t i = 0; i < mapped.size(); ++i) {
        if (!mapped[i]) {
            throw std::invalid_argument("scheme " + s.name + ": base class '" +
                                        palette.classes[i].name + "' has no merge target");
        }
    }
    if (root["safe"]) {
        for (const auto& name : root["safe"].as<std::vector<std::string>>()) {
            s.safe_set.push_back(s.output_id(name));
        }
    }
    std::sort(s.safe_set.begin(), s.safe_set.end());
    s.safe_set.erase(std::unique(s.safe_set.begin(), s.safe_set.end()), s.safe_set.end());
    return s;
}

ClassScheme load_scheme(const std::filesystem::path& path, const Palette& palette) {
    return parse_scheme(read_text(path), palette);
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("SLZ_DATA_DIR"); env && *env) return env;
    return SLZ_DEFAULT_DATA_DIR;
}

Palette default_palette() { return load_palette(data_dir() / "palette.yaml"); }

ClassScheme scheme_by_name(const std::string& name_or_path, const Palette& palette) {
    const std::filesystem::path as_path(name_or_path);
    if (std::filesystem::is_regular_file(as_path)) return load_scheme(as_path, palette);
    const auto builtin = data_dir() / "schemes" / (name_or_path + ".yaml");
    if (std::filesystem::is_regular_file(builtin)) return load_scheme(builtin, palette);
    throw std::invalid_argument("unknown class scheme '" + name_or_path + "'");
}

Mask decode_palette_mask(const RgbImage& color_mask, const Palette& palette) {
    std::map<std::uint32_t, std::uint8_t> lookup;
    for (std::size_t i = 0; i < palette.size(); ++i) {
        lookup[color_key(palette.classes[i].color)] = static_cast<std::uint8_t>(i);
    }
    Mask m(color_mask.width, color_mask.height);
    std::uint32_t last_key = 0xFFFFFFFF;
    std::uint8_t last_id = 0;
    for (std::size_t y = 0; y < m.height; ++y) {
        for (std::size_t x = 0; x < m.width; ++x) {
            const Rgb c = color_mask.pixel(x, y);
            const auto key = color_key(c);
            if (key != last_key) {
                const auto it = lookup.find(key);
                if (it == lookup.end()) {
                    throw std::invalid_argument(
                        "unknown mask color (" + std::to_string(c[0]) + "," +
                        std::to_string(c[1]) + "," + std::to_string(c[2]) + ") at pixel (" +
                        std::to_string(x) + "," + std::to_string(y) + ")");
                }
                last_key = key;
                last_id = it->second;
            }
            m.at(x, y) = last_id;
        }
    }
    return m;
}

RgbImage encode_palette_mask(const Mask& mask, const Palette& palette) {
    RgbImage img(mask.width, mask.height);
    for (std::size_t y = 0; y < mask.height; ++y) {
        for (std::size_t x = 0; x < mask.width; ++x) {
            const auto id = mask.at(x, y);
            if (id >= palette.size()) {
                throw std::invalid_argument("mask ID " + std::to_string(id) +
                                            " has no palette color");
            }
            img.set(x, y, palette.classes[id].color);
        }
    }
    return img;
}

Mask remap(const Mask& base_mask, const ClassScheme& scheme) {
    Mask out(base_mask.width, base_mask.height);
    for (std::size_t i = 0; i < base_mask.cells.size(); ++i) {
        const auto id = base_mask.cells[i];
        if (id >= scheme.merge_map.size()) {
            throw std::invalid_argument("remap: base ID " + std::to_string(id) +
                                        " outside the " + std::to_string(scheme.merge_map.size()) +
                                        "-class palette of scheme " + scheme.name);
        }
        out.cells[i] = scheme.merge_map[id];
    }
    return out;
}

}  // namespace slz
