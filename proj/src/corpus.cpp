#include "slz/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "slz/image.hpp"
#include "slz/image_io.hpp"

namespace slz {

namespace {

void write_text(const std::filesystem::path& path, const char* text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

YAML::Node load_yaml(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error(path.string() + " does not exist");
    try {
        return YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace

void write_corpus_manifest(const std::filesystem::path& path, const Corpus& corpus) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "scheme" << YAML::Value << corpus.scheme;
    e << YAML::Key << "num_classes" << YAML::Value << corpus.num_classes;
    e << YAML::Key << "classes" << YAML::Value << YAML::Flow << corpus.classes;
    e << YAML::Key << "tile_size" << YAML::Value << corpus.tile_size;
    e << YAML::Key << "tiles" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : corpus.entries) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "image" << YAML::Value << t.image;
        e << YAML::Key << "mask" << YAML::Value << t.mask;
        e << YAML::Key << "source" << YAML::Value << t.origin.source_id;
        e << YAML::Key << "grid_x" << YAML::Value << t.origin.grid_x;
        e << YAML::Key << "grid_y" << YAML::Value << t.origin.grid_y;
        e << YAML::Key << "x" << YAML::Value << t.origin.pixel_x;
        e << YAML::Key << "y" << YAML::Value << t.origin.pixel_y;
        e << YAML::Key << "footprint" << YAML::Value << t.origin.footprint;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
    write_text(path, e.c_str());
}

Corpus read_corpus_manifest(const std::filesystem::path& path) {
    const YAML::Node root = load_yaml(path);
    Corpus c;
    try {
        c.scheme = root["scheme"].as<std::string>();
        c.num_classes = root["num_classes"].as<std::size_t>();
        if (root["classes"]) c.classes = root["classes"].as<std::vector<std::string>>();
        c.tile_size = root["tile_size"].as<std::size_t>(0);
        for (const auto& t : root["tiles"]) {
            CorpusEntry entry;
            entry.image = t["image"].as<std::string>();
            entry.mask = t["mask"].as<std::string>();
            entry.origin.source_id = t["source"].as<std::string>("");
            entry.origin.grid_x = t["grid_x"].as<std::size_t>(0);
            entry.origin.grid_y = t["grid_y"].as<std::size_t>(0);
            entry.origin.pixel_x = t["x"].as<std::size_t>(0);
            entry.origin.pixel_y = t["y"].as<std::size_t>(0);
            entry.origin.footprint = t["footprint"].as<std::size_t>(0);
            c.entries.push_back(std::move(entry));
        }
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (c.entries.empty()) throw std::runtime_error(path.string() + ": corpus lists no tiles");
    return c;
}

std::vector<LabeledTile> load_corpus_tiles(const std::filesystem::path& path, const Corpus& corpus) {
    const auto base = path.parent_path();
    std::vector<LabeledTile> tiles;
    tiles.reserve(corpus.entries.size());
    for (const auto& e : corpus.entries) {
        LabeledTile t;
        const RgbImage image = read_png_rgb(base / e.image);
        t.mask = read_png_mask(base / e.mask);
        if (image.width != t.mask.width || image.height != t.mask.height) {
            throw std::runtime_error(e.image + " and " + e.mask + " differ in size");
        }
        for (const auto id : t.mask.cells) {
            if (id >= corpus.num_classes) {
                throw std::runtime_error(e.mask + ": class ID " + std::to_string(id) +
                                         " exceeds the corpus class count " +
                                         std::to_string(corpus.num_classes));
            }
        }
        t.image = to_tensor(image);
        t.origin = e.origin;
        tiles.push_back(std::move(t));
    }
    return tiles;
}

void write_descent_manifest(const std::filesystem::path& path, const DescentManifest& m) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "environment" << YAML::Value << m.environment;
    if (m.landing_frame) e << YAML::Key << "landing_frame" << YAML::Value << *m.landing_frame;
    if (m.drop_per_frame) e << YAML::Key << "drop_per_frame" << YAML::Value << *m.drop_per_frame;
    if (m.initial_mask) e << YAML::Key << "initial_mask" << YAML::Value << *m.initial_mask;
    e << YAML::Key << "frames" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : m.frames) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "index" << YAML::Value << f.index;
        if (f.altitude_m) e << YAML::Key << "altitude_m" << YAML::Value << *f.altitude_m;
        e << YAML::Key << "image" << YAML::Value << f.image;
        if (f.mask) e << YAML::Key << "mask" << YAML::Value << *f.mask;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
    write_text(path, e.c_str());
}

DescentManifest read_descent_manifest(const std::filesystem::path& path) {
    const YAML::Node root = load_yaml(path);
    DescentManifest m;
    try {
        m.environment = root["environment"].as<std::string>(m.environment);
        if (root["landing_frame"]) m.landing_frame = root["landing_frame"].as<std::size_t>();
        if (root["drop_per_frame"]) m.drop_per_frame = root["drop_per_frame"].as<double>();
        if (root["initial_mask"]) m.initial_mask = root["initial_mask"].as<std::string>();
        for (const auto& f : root["frames"]) {
            ManifestFrame frame;
            frame.index = f["index"].as<std::size_t>();
            if (f["altitude_m"]) frame.altitude_m = f["altitude_m"].as<double>();
            frame.image = f["image"].as<std::string>();
            if (f["mask"]) frame.mask = f["mask"].as<std::string>();
            m.frames.push_back(std::move(frame));
        }
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (m.frames.empty()) throw std::runtime_error(path.string() + ": manifest lists no frames");
    return m;
}

ManifestFrames::ManifestFrames(std::filesystem::path base_dir, DescentManifest manifest,
                               ClassScheme scheme, DescentProfile profile)
    : base_(std::move(base_dir)),
      manifest_(std::move(manifest)),
      scheme_(std::move(scheme)),
      profile_(profile) {
    if (manifest_.landing_frame) profile_.landing_frame = *manifest_.landing_frame;
    if (manifest_.drop_per_frame) profile_.drop_per_frame = *manifest_.drop_per_frame;
    for (std::size_t i = 0; i < manifest_.frames.size(); ++i) {
        const auto& f = manifest_.frames[i];
        if (!f.altitude_m && !manifest_.landing_frame) {
            throw std::runtime_error("frame " + std::to_string(f.index) +
                                     " has no altitude and the manifest has no landing_frame");
        }
        if (i > 0 && manifest_.frames[i - 1].index >= f.index) {
            throw std::runtime_error("manifest frame indices must increase (frame " +
                                     std::to_string(f.index) + ")");
        }
    }
}

double ManifestFrames::altitude(std::size_t position) const {
    const auto& f = manifest_.frames.at(position);
    return f.altitude_m ? *f.altitude_m : altitude_at(profile_, f.index);
}

FrameRecord ManifestFrames::load(std::size_t position) const {
    const auto& f = manifest_.frames.at(position);
    FrameRecord r;
    r.frame_index = f.index;
    r.altitude_m = altitude(position);
    const RgbImage image = read_png_rgb(base_ / f.image);
    r.image = to_tensor(image);
    if (f.mask) {
        Mask base = read_png_mask(base_ / *f.mask);
        if (base.width != image.width || base.height != image.height) {
            throw std::runtime_error(*f.mask + " does not match its frame size");
        }
        r.truth = remap(base, scheme_);
    }
    return r;
}

std::optional<Mask> ManifestFrames::initial_truth() const {
    std::optional<std::string> path = manifest_.initial_mask;
    if (!path) path = manifest_.frames.front().mask;
    if (!path) return std::nullopt;
    return remap(read_png_mask(base_ / *path), scheme_);
}

}  // namespace slz
