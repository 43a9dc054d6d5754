#include "slz/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "slz/checkpoint.hpp"
#include "slz/corpus.hpp"
#include "slz/descent_sim.hpp"
#include "slz/image_io.hpp"
#include "slz/report.hpp"
#include "slz/synth.hpp"
#include "slz/tiling.hpp"

namespace fs = std::filesystem;

namespace slz {

namespace {

std::string numbered(std::size_t i, std::size_t width = 6) {
    std::string s = std::to_string(i);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string opt_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

ClassScheme resolve_scheme(const std::string& name) {
    if (!fs::is_regular_file(name) && !fs::is_regular_file(data_dir() / "schemes" / (name + ".yaml"))) {
        throw UsageError("unknown class scheme '" + name + "'");
    }
    return scheme_by_name(name, default_palette());
}

void require_corpus_matches(const Corpus& corpus, const ClassScheme& scheme) {
    if (corpus.num_classes != scheme.num_classes()) {
        throw std::runtime_error("corpus has " + std::to_string(corpus.num_classes) +
                                 " classes but scheme " + scheme.name + " has " +
                                 std::to_string(scheme.num_classes()));
    }
}

void require_model_matches(const UNetParams<float>& params, const ClassScheme& scheme) {
    if (params.config.num_classes != scheme.num_classes()) {
        throw std::runtime_error("checkpoint predicts " + std::to_string(params.config.num_classes) +
                                 " classes but scheme " + scheme.name + " has " +
                                 std::to_string(scheme.num_classes()));
    }
}

void write_iou_yaml(YAML::Emitter& e, const ClassScheme& scheme, const IouResult& r) {
    e << YAML::Key << "mean_iou" << YAML::Value << r.mean;
    e << YAML::Key << "mean_iou_averaging" << YAML::Value
      << "over classes with a non-empty union, pooled over all pixels";
    e << YAML::Key << "per_class_iou" << YAML::Value << YAML::BeginMap;
    for (std::size_t c = 0; c < scheme.num_classes(); ++c) {
        e << YAML::Key << scheme.output_classes[c] << YAML::Value;
        if (r.per_class[c]) {
            e << *r.per_class[c];
        } else {
            e << YAML::Null;
        }
    }
    e << YAML::EndMap;
    e << YAML::Key << "undefined_classes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (std::size_t c = 0; c < scheme.num_classes(); ++c) {
        if (!r.per_class[c]) e << scheme.output_classes[c];
    }
    e << YAML::EndSeq;
}

}  // namespace

std::string axis_label(const std::string& column) {
    if (column == "altitude_m") return "altitude (m)";
    if (column == "frame_index") return "frame index";
    std::string s = column;
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
}

TileReport cmd_tile(const TileCommand& cmd, std::ostream& log) {
    const Palette palette = default_palette();
    const ClassScheme scheme = resolve_scheme(cmd.scheme);
    std::vector<AugmentOp> ops;
    for (const auto& name : cmd.augment) {
        try {
            ops.push_back(parse_augment_op(name));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (cmd.tile_size == 0) throw UsageError("tile size must be positive");

    const fs::path images_dir = cmd.in_dir / "images";
    const fs::path masks_dir = cmd.in_dir / "masks";
    std::vector<fs::path> images;
    if (fs::is_directory(images_dir)) {
        for (const auto& entry : fs::directory_iterator(images_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".png") {
                images.push_back(entry.path());
            }
        }
    }
    if (images.empty()) throw std::runtime_error("no PNG images under " + images_dir.string());
    std::sort(images.begin(), images.end());

    fs::create_directories(cmd.out_dir / "tiles");
    TileReport report;
    Corpus corpus;
    corpus.scheme = scheme.name;
    corpus.num_classes = scheme.num_classes();
    corpus.classes = scheme.output_classes;
    corpus.tile_size = cmd.tile_size;
    const TileOptions options{cmd.tile_size, cmd.section_size};

    const auto emit = [&](const LabeledTile& t) {
        const std::string stem = "tiles/" + numbered(corpus.entries.size());
        write_png_rgb(cmd.out_dir / (stem + "_image.png"), to_rgb(t.image));
        write_png_mask(cmd.out_dir / (stem + "_mask.png"), t.mask);
        corpus.entries.push_back({stem + "_image.png", stem + "_mask.png", t.origin});
    };

    for (const auto& image_path : images) {
        const fs::path mask_path = masks_dir / image_path.filename();
        if (!fs::exists(mask_path)) {
            log << "missing mask for " << image_path.string() << "; skipped\n";
            report.skipped.push_back(image_path.string());
            continue;
        }
        const RgbImage image = read_png_rgb(image_path);
        const Mask base = cmd.mask_format == MaskFormat::color
                              ? decode_palette_mask(read_png_rgb(mask_path), palette)
                              : read_png_mask(mask_path);
        const auto tiles = tile(image, remap(base, scheme), options, image_path.stem().string());
        for (const auto& t : tiles) {
            emit(t);
            if (!ops.empty()) emit(augment(t, ops, cmd.seed + corpus.entries.size()));
        }
    }
    if (corpus.entries.empty()) {
        std::string msg = "no image in " + cmd.in_dir.string() + " had a mask";
        if (!report.skipped.empty()) {
            msg += "; skipped:";
            for (const auto& s : report.skipped) msg += " " + s;
        }
        throw std::runtime_error(msg);
    }
    write_corpus_manifest(cmd.out_dir / "corpus.yaml", corpus);
    report.tiles = corpus.entries.size();
    log << "tiles: " << report.tiles << '\n';
    return report;
}

IouResult evaluate_tiles(const TilePredictor& predict, std::span<const LabeledTile> tiles,
                         std::size_t num_classes) {
    ConfusionMatrix total(num_classes);
    for (const auto& t : tiles) total += confusion(predict(t), t.mask, num_classes);
    return iou(total);
}

void write_iou_table(std::ostream& out, const ClassScheme& scheme, const IouResult& result) {
    CsvWriter csv(out);
    std::vector<std::string> header = scheme.output_classes;
    header.emplace_back("mean");
    csv.row(header);
    std::vector<std::string> row;
    for (const auto& v : result.per_class) row.push_back(opt_number(v));
    row.push_back(format_number(result.mean));
    csv.row(row);
}

TrainReport cmd_train(const TrainCommand& cmd, std::ostream& log) {
    const ClassScheme scheme = resolve_scheme(cmd.scheme);
    const Corpus corpus = read_corpus_manifest(cmd.tiles);
    require_corpus_matches(corpus, scheme);
    const auto tiles = load_corpus_tiles(cmd.tiles, corpus);

    UNetConfig cfg = cmd.unet;
    cfg.in_channels = 3;
    cfg.num_classes = scheme.num_classes();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (cmd.batch_size == 0) throw UsageError("batch size must be positive");

    TrainHyper hyper;
    hyper.epochs = cmd.epochs;
    hyper.batch_size = cmd.batch_size;
    hyper.shuffle_seed = cmd.shuffle_seed.value_or(cfg.seed);
    hyper.adam = cmd.adam;
    hyper.ignore_label = cmd.ignore_label;

    fs::create_directories(cmd.out_dir);
    auto loss_out = open_out(cmd.out_dir / "loss.csv");
    CsvWriter loss_csv(loss_out);
    loss_csv.row({"step", "epoch", "loss"});
    const std::size_t steps_per_epoch = (tiles.size() + hyper.batch_size - 1) / hyper.batch_size;
    const auto result = train(build<float>(cfg), tiles, hyper, [&](std::size_t step, double loss) {
        loss_csv.row({std::to_string(step), std::to_string(step / steps_per_epoch), format_number(loss)});
    });
    save_checkpoint(cmd.out_dir / "model.slzk", result.params);

    TrainReport report;
    report.steps = result.loss_history.size();
    report.final_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
    report.train_iou = evaluate_tiles(
        [&](const LabeledTile& t) { return predict_mask(result.params, t.image); }, tiles,
        scheme.num_classes());

    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "steps" << YAML::Value << report.steps;
    e << YAML::Key << "final_loss" << YAML::Value << report.final_loss;
    e << YAML::Key << "parameters" << YAML::Value << result.params.parameter_count();
    write_iou_yaml(e, scheme, report.train_iou);
    e << YAML::EndMap;
    write_file(cmd.out_dir / "train_summary.yaml", std::string(e.c_str()) + "\n");

    log << "steps: " << report.steps << '\n'
        << "final_loss: " << format_number(report.final_loss) << '\n'
        << "train_mean_iou: " << format_number(report.train_iou.mean) << '\n';
    return report;
}

IouResult cmd_eval(const EvalCommand& cmd, std::ostream& log) {
    if (cmd.oracle == cmd.checkpoint.has_value()) {
        throw UsageError("eval needs exactly one of --checkpoint or --oracle");
    }
    const ClassScheme scheme = resolve_scheme(cmd.scheme);
    const Corpus corpus = read_corpus_manifest(cmd.tiles);
    require_corpus_matches(corpus, scheme);
    const auto tiles = load_corpus_tiles(cmd.tiles, corpus);

    IouResult result;
    if (cmd.oracle) {
        result = evaluate_tiles([](const LabeledTile& t) { return t.mask; }, tiles,
                                scheme.num_classes());
    } else {
        const auto params = load_checkpoint(*cmd.checkpoint);
        require_model_matches(params, scheme);
        result = evaluate_tiles([&](const LabeledTile& t) { return predict_mask(params, t.image); },
                                tiles, scheme.num_classes());
    }

    fs::create_directories(cmd.out_dir);
    auto out = open_out(cmd.out_dir / "metrics.csv");
    write_iou_table(out, scheme, result);

    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "scheme" << YAML::Value << scheme.name;
    e << YAML::Key << "tiles" << YAML::Value << tiles.size();
    write_iou_yaml(e, scheme, result);
    e << YAML::EndMap;
    write_file(cmd.out_dir / "eval_summary.yaml", std::string(e.c_str()) + "\n");

    log << "mean_iou: " << format_number(result.mean) << '\n';
    if (result.undefined_classes) {
        log << "classes absent from truth and prediction (excluded from mean): "
            << result.undefined_classes << '\n';
    }
    return result;
}

std::vector<DescendRun> cmd_descend(const DescendCommand& cmd, std::ostream& log) {
    if (cmd.manifests.empty()) throw UsageError("descend needs at least one --manifest");
    if (cmd.oracle == cmd.checkpoint.has_value()) {
        throw UsageError("descend needs exactly one of --checkpoint or --oracle");
    }
    const ClassScheme scheme = resolve_scheme(cmd.scheme);
    PipelineConfig pipeline = cmd.pipeline;
    pipeline.scheme = scheme;
    try {
        pipeline.validate();
        cmd.camera.validate();
        cmd.profile.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    Segmenter segmenter;
    if (cmd.oracle) {
        segmenter = oracle_segmenter(scheme.num_classes());
    } else {
        auto params = load_checkpoint(*cmd.checkpoint);
        require_model_matches(params, scheme);
        segmenter = unet_segmenter(std::move(params));
    }
    const std::size_t k = scheme.num_classes();

    fs::create_directories(cmd.out_dir);
    auto decisions_out = open_out(cmd.out_dir / "decisions.csv");
    CsvWriter decisions(decisions_out);
    decisions.row({"frame_index", "altitude_m", "verdict", "zone_center_x", "zone_center_y",
                   "zone_side_px", "zone_side_m", "interframe_binary_iou", "pixels_processed",
                   "environment", "run"});
    auto iou_out = open_out(cmd.out_dir / "iou_altitude.csv");
    CsvWriter iou_csv(iou_out);
    iou_csv.row({"frame_index", "altitude_m", "interframe_binary_iou", "interframe_mean_iou",
                 "environment", "run"});

    std::ostringstream metrics_buf;
    CsvWriter metrics(metrics_buf);
    {
        std::vector<std::string> header{"frame_index", "altitude_m", "mean_iou"};
        for (const auto& name : scheme.output_classes) header.push_back("iou_" + name);
        for (const auto& col : {"fpr", "flags", "environment", "run"}) header.emplace_back(col);
        metrics.row(header);
    }
    bool any_metrics = false;

    std::vector<DescendRun> runs;
    std::map<std::string, std::size_t> run_names;
    for (const auto& manifest_path : cmd.manifests) {
        ManifestFrames frames(manifest_path.parent_path(), read_descent_manifest(manifest_path),
                              scheme, cmd.profile);
        const std::string env = frames.manifest().environment;
        std::string run = manifest_path.stem().string();
        if (const auto n = run_names[run]++; n > 0) run += "#" + std::to_string(n);

        const std::optional<Mask> truth0 = frames.initial_truth();
        const double h0 = frames.altitude(0);
        std::optional<Mask> prev_classes;
        double prev_altitude = 0.0;

        const auto observer = [&](const FrameRecord& frame, const FrameAssessment& a,
                                  const LandingDecision& d) {
            const std::string idx = std::to_string(d.frame_index);
            const std::string alt = format_number(d.altitude_m);
            std::vector<std::string> row{idx, alt, std::string(to_string(d.verdict))};
            if (d.zone) {
                row.push_back(format_number(d.zone->center_x()));
                row.push_back(format_number(d.zone->center_y()));
                row.push_back(std::to_string(d.zone->side_px));
                row.push_back(format_number(d.zone->side_m));
            } else {
                row.insert(row.end(), 4, std::string());
            }
            row.push_back(opt_number(d.interframe_binary_iou));
            row.push_back(std::to_string(d.pixels_processed));
            row.push_back(env);
            row.push_back(run);
            decisions.row(row);

            if (d.interframe_binary_iou && prev_classes) {
                const Mask projected = backproject_crop(*prev_classes, prev_altitude, d.altitude_m);
                const double mean = iou(confusion(a.classes, projected, k)).mean;
                iou_csv.row({idx, alt, format_number(*d.interframe_binary_iou), format_number(mean),
                             env, run});
            }
            prev_classes = a.classes;
            prev_altitude = d.altitude_m;

            if (!truth0) return;
            if (truth0->width != frame.image.dim(2) || truth0->height != frame.image.dim(1)) {
                throw std::runtime_error("initial mask of " + run + " does not match the frame size");
            }
            any_metrics = true;
            std::vector<std::string> m{idx, alt};
            if (d.altitude_m <= 0.0) {
                m.insert(m.end(), k + 3, std::string());
                m.back() = "no_footprint";
            } else {
                const Mask gt = crop(backproject_crop(*truth0, h0, d.altitude_m), a.window);
                const auto r = iou(confusion(a.classes, gt, k));
                const auto f = fpr(a.safety, to_binary(gt, scheme));
                m.push_back(format_number(r.mean));
                for (const auto& v : r.per_class) m.push_back(opt_number(v));
                m.push_back(format_number(f.value));
                std::string flags;
                if (f.undefined_denominator) flags = "fpr_undefined";
                for (std::size_t c = 0; c < k; ++c) {
                    if (r.per_class[c]) continue;
                    if (!flags.empty()) flags += ';';
                    flags += "iou_undefined:" + scheme.output_classes[c];
                }
                m.push_back(flags);
            }
            m.push_back(env);
            m.push_back(run);
            metrics.row(m);
        };

        DescendRun r{env, run, run_descent(segmenter, frames, pipeline, cmd.camera, observer)};
        const auto& s = r.result.summary;
        log << run << " (" << env << "): processed " << s.frames_processed << "/" << s.frames_total
            << " frames, " << s.pixels_processed << " pixels, " << s.aborts << " dynamic aborts";
        if (s.first_abort_frame) log << ", first at frame " << *s.first_abort_frame;
        log << '\n';
        runs.push_back(std::move(r));
    }
    decisions_out.close();
    iou_out.close();

    YAML::Emitter e;
    e << YAML::BeginMap << YAML::Key << "runs" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : runs) {
        const auto& s = r.result.summary;
        e << YAML::BeginMap;
        e << YAML::Key << "run" << YAML::Value << r.run;
        e << YAML::Key << "environment" << YAML::Value << r.environment;
        e << YAML::Key << "frames_total" << YAML::Value << s.frames_total;
        e << YAML::Key << "frames_processed" << YAML::Value << s.frames_processed;
        e << YAML::Key << "pixels_processed" << YAML::Value << s.pixels_processed;
        e << YAML::Key << "aborts" << YAML::Value << s.aborts;
        e << YAML::Key << "first_abort_frame" << YAML::Value;
        if (s.first_abort_frame) {
            e << *s.first_abort_frame;
        } else {
            e << YAML::Null;
        }
        if (!s.iou_series.empty()) {
            const auto lowest = std::min_element(
                s.iou_series.begin(), s.iou_series.end(),
                [](const IouSample& a, const IouSample& b) { return a.iou < b.iou; });
            e << YAML::Key << "min_interframe_binary_iou" << YAML::Value << lowest->iou;
            e << YAML::Key << "min_interframe_binary_iou_frame" << YAML::Value << lowest->frame_index;
        }
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
    write_file(cmd.out_dir / "summary.yaml", std::string(e.c_str()) + "\n");

    const auto chart = [&](const fs::path& csv_path, const std::string& x, const std::string& y,
                           const std::string& title, const std::string& name) {
        std::ifstream in(csv_path);
        const auto table = read_csv(in, csv_path.string());
        const auto series = average_by_x(series_from_csv(table, x, y, "environment"));
        if (series.empty()) return;
        write_file(cmd.out_dir / (name + ".svg"),
                   render_line_chart({title, axis_label(x), axis_label(y)}, series));
    };
    chart(cmd.out_dir / "iou_altitude.csv", "altitude_m", "interframe_binary_iou",
          "Inter-frame binary IOU vs altitude", "iou_vs_altitude");
    if (any_metrics) {
        write_file(cmd.out_dir / "metrics.csv", metrics_buf.str());
        chart(cmd.out_dir / "metrics.csv", "frame_index", "mean_iou",
              "Mean IOU against the back-projected initial mask", "mean_iou_per_frame");
        chart(cmd.out_dir / "metrics.csv", "frame_index", "fpr", "False positive rate per frame",
              "fpr_per_frame");
    }
    return runs;
}

fs::path cmd_report(const ReportCommand& cmd, std::ostream& log) {
    if (cmd.csv.empty()) throw UsageError("report needs at least one --csv");
    std::vector<ChartSeries> series;
    std::map<std::string, std::size_t> index;
    for (const auto& path : cmd.csv) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read " + path.string());
        const auto table = read_csv(in, path.string());
        std::vector<ChartSeries> part;
        try {
            part = series_from_csv(table, cmd.x, cmd.y,
                                   cmd.group ? std::optional<std::string_view>(*cmd.group)
                                             : std::nullopt);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ": " + e.what());
        }
        for (auto& s : part) {
            if (!cmd.group && cmd.csv.size() > 1) s.name = path.stem().string();
            auto [it, inserted] = index.emplace(s.name, series.size());
            if (inserted) {
                series.push_back(std::move(s));
            } else {
                auto& pts = series[it->second].points;
                pts.insert(pts.end(), s.points.begin(), s.points.end());
            }
        }
    }
    if (series.empty()) throw std::runtime_error("no rows with a value in column '" + cmd.y + "'");
    if (cmd.average) series = average_by_x(series);

    const std::string name = cmd.name.empty() ? cmd.y + "_vs_" + cmd.x : cmd.name;
    const std::string title = cmd.title.empty() ? axis_label(cmd.y) + " vs " + axis_label(cmd.x)
                                                : cmd.title;
    fs::create_directories(cmd.out_dir);
    const fs::path out = cmd.out_dir / (name + ".svg");
    write_file(out, render_line_chart({title, axis_label(cmd.x), axis_label(cmd.y)}, series));
    log << "wrote " << out.string() << " (" << series.size() << " series)\n";
    return out;
}

void cmd_synth(const SynthCommand& cmd, std::ostream& log) {
    std::ifstream in(cmd.spec);
    if (!in) throw std::runtime_error("cannot read " + cmd.spec.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const Palette palette = default_palette();
    const std::string stem = cmd.spec.stem().string();
    bool is_descent = false;
    try {
        is_descent = static_cast<bool>(YAML::Load(text)["descent"]);
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(cmd.spec.string() + ": " + e.what());
    }

    if (is_descent) {
        const SyntheticDescent descent(parse_descent_sim_spec(text), palette, cmd.seed);
        fs::create_directories(cmd.out_dir / "frames");
        DescentManifest m;
        m.environment = descent.spec().environment;
        m.landing_frame = descent.spec().profile.landing_frame;
        m.drop_per_frame = descent.spec().profile.step_m();
        for (std::size_t i = 0; i < descent.size(); ++i) {
            const auto f = descent.render(i);
            const std::string base = "frames/" + numbered(i);
            write_png_rgb(cmd.out_dir / (base + ".png"), f.image);
            write_png_mask(cmd.out_dir / (base + "_mask.png"), f.mask);
            m.frames.push_back({i, f.altitude_m, base + ".png", base + "_mask.png"});
        }
        write_descent_manifest(cmd.out_dir / "descent.yaml", m);
        log << "frames: " << descent.size() << '\n';
        return;
    }

    const auto frames = synth_scene(parse_scene_spec(text), palette, cmd.seed);
    fs::create_directories(cmd.out_dir / "images");
    fs::create_directories(cmd.out_dir / "masks");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::string name = frames.size() == 1 ? stem : stem + "_f" + numbered(i, 3);
        write_png_rgb(cmd.out_dir / "images" / (name + ".png"), frames[i].image);
        write_png_rgb(cmd.out_dir / "masks" / (name + ".png"),
                      encode_palette_mask(frames[i].mask, palette));
    }
    log << "scenes: " << frames.size() << '\n';
}

}  // namespace slz
