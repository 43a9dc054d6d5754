#include "slz/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "slz/metrics.hpp"

namespace slz {

Segmenter unet_segmenter(UNetParams<float> params) {
    auto shared = std::make_shared<const UNetParams<float>>(std::move(params));
    Segmenter s;
    s.num_classes = shared->config.num_classes;
    s.size_multiple = shared->config.size_multiple();
    s.segment = [shared](const FrameRecord& frame, const Window& window) {
        const bool full = window.width == frame.image.dim(2) && window.height == frame.image.dim(1);
        return predict_mask(*shared, full ? frame.image : crop(frame.image, window));
    };
    return s;
}

Segmenter oracle_segmenter(std::size_t num_classes) {
    Segmenter s;
    s.num_classes = num_classes;
    s.segment = [](const FrameRecord& frame, const Window& window) {
        if (!frame.truth) {
            throw std::invalid_argument("oracle segmenter: frame " +
                                        std::to_string(frame.frame_index) + " has no ground truth");
        }
        return crop(*frame.truth, window);
    };
    return s;
}

void PipelineConfig::validate() const {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) {
        throw std::invalid_argument("crop fraction must lie in (0, 1]");
    }
    if (!(dynamic_iou_threshold > 0.0 && dynamic_iou_threshold < 1.0)) {
        throw std::invalid_argument("dynamic IOU threshold must lie in (0, 1)");
    }
    if (!(drone_footprint_m >= 0.0)) throw std::invalid_argument("drone footprint must be >= 0");
    if (scheme.num_classes() < 2) throw std::invalid_argument("pipeline needs a class scheme");
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::safe:
            return "safe";
        case Verdict::unsafe:
            return "unsafe";
        case Verdict::abort_dynamic:
            return "abort_dynamic";
    }
    return "unknown";
}

Window processing_window(std::size_t width, std::size_t height, double crop_fraction,
                         std::size_t multiple) {
    Window w = centered_window(width, height, crop_fraction);
    const auto fit = [multiple](std::size_t side, std::size_t limit) {
        const std::size_t up = (side + multiple - 1) / multiple * multiple;
        if (up <= limit) return up;
        const std::size_t down = limit / multiple * multiple;
        if (down == 0) {
            throw std::invalid_argument("frame side " + std::to_string(limit) +
                                        " is smaller than the segmenter's size multiple " +
                                        std::to_string(multiple));
        }
        return down;
    };
    w.width = fit(w.width, width);
    w.height = fit(w.height, height);
    w.x = (width - w.width) / 2;
    w.y = (height - w.height) / 2;
    return w;
}

FrameAssessment assess_frame(const Segmenter& segmenter, const FrameRecord& frame,
                             const PipelineConfig& cfg) {
    if (segmenter.num_classes != cfg.scheme.num_classes()) {
        throw std::invalid_argument("segmenter predicts " + std::to_string(segmenter.num_classes) +
                                    " classes but scheme " + cfg.scheme.name + " has " +
                                    std::to_string(cfg.scheme.num_classes()));
    }
    require_chw(frame.image, "assess_frame");
    FrameAssessment a;
    a.window = processing_window(frame.image.dim(2), frame.image.dim(1), cfg.crop_fraction,
                                 segmenter.size_multiple);
    a.classes = segmenter.segment(frame, a.window);
    if (a.classes.width != a.window.width || a.classes.height != a.window.height) {
        throw std::runtime_error("segmenter returned a mask of the wrong size");
    }
    a.safety = to_binary(a.classes, cfg.scheme);
    a.pixels_processed = a.window.area();
    return a;
}

DynamicCheck detect_dynamic(const SafetyMask& prev, const SafetyMask& curr, double h_prev,
                            double h_curr, double threshold) {
    DynamicCheck d;
    d.iou = binary_interframe_iou(prev, curr, h_prev, h_curr);
    d.triggered = d.iou < threshold;
    return d;
}

SquareRegion largest_safe_square(const SafetyMask& safety) {
    const std::size_t w = safety.width, h = safety.height;
    // side[y][x]: largest all-safe square with bottom-right corner at (x, y).
    std::vector<std::size_t> side(w * h, 0);
    std::size_t best = 0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!safety.safe(x, y)) continue;
            std::size_t s = 1;
            if (x > 0 && y > 0) {
                s = 1 + std::min({side[(y - 1) * w + x], side[y * w + x - 1],
                                  side[(y - 1) * w + x - 1]});
            }
            side[y * w + x] = s;
            best = std::max(best, s);
        }
    }
    SquareRegion r;
    if (best == 0) return r;
    r.side = best;
    // Topmost, then leftmost, top-left corner among all maximal squares.
    bool found = false;
    for (std::size_t y = best - 1; y < h; ++y) {
        for (std::size_t x = best - 1; x < w; ++x) {
            if (side[y * w + x] < best) continue;
            const std::size_t top = y + 1 - best, left = x + 1 - best;
            if (!found || top < r.y || (top == r.y && left < r.x)) {
                r.x = left;
                r.y = top;
                found = true;
            }
        }
    }
    return r;
}

std::optional<LandingZone> select_zone(const SafetyMask& safety, double altitude_m,
                                       const CameraModel& camera, double required_side_m,
                                       std::optional<std::size_t> frame_side_px) {
    if (!(altitude_m > 0.0)) throw std::invalid_argument("select_zone: altitude must be positive");
    const std::size_t frame_side = frame_side_px.value_or(safety.width);
    if (frame_side == 0) return std::nullopt;
    const double meters_per_px = footprint_width(altitude_m, camera) / static_cast<double>(frame_side);
    const auto sq = largest_safe_square(safety);
    if (sq.side == 0) return std::nullopt;
    LandingZone z{sq.x, sq.y, sq.side, static_cast<double>(sq.side) * meters_per_px};
    if (z.side_m < required_side_m) return std::nullopt;
    return z;
}

DescentResult run_descent(const Segmenter& segmenter, const FrameSource& frames,
                          const PipelineConfig& cfg, const CameraModel& camera,
                          const FrameObserver& observer) {
    cfg.validate();
    camera.validate();
    if (frames.size() == 0) throw std::invalid_argument("run_descent: no frames");

    DescentResult result;
    result.summary.frames_total = frames.size();
    std::optional<SafetyMask> prev_safety;
    double prev_altitude = 0.0;
    std::optional<double> last_altitude;

    for (std::size_t pos = 0; pos < frames.size(); pos += cfg.stride) {
        const FrameRecord frame = frames.load(pos);
        if (frame.altitude_m < 0.0) throw std::invalid_argument("frame altitude is negative");
        if (last_altitude && frame.altitude_m > *last_altitude) {
            throw std::invalid_argument("frame " + std::to_string(frame.frame_index) +
                                        " is higher than its predecessor; frames must descend");
        }
        last_altitude = frame.altitude_m;

        const auto assessment = assess_frame(segmenter, frame, cfg);
        LandingDecision d;
        d.frame_index = frame.frame_index;
        d.altitude_m = frame.altitude_m;
        d.pixels_processed = assessment.pixels_processed;

        bool dynamic = false;
        if (prev_safety && frame.altitude_m > 0.0 &&
            prev_safety->width == assessment.safety.width &&
            prev_safety->height == assessment.safety.height) {
            const auto check = detect_dynamic(*prev_safety, assessment.safety, prev_altitude,
                                              frame.altitude_m, cfg.dynamic_iou_threshold);
            d.interframe_binary_iou = check.iou;
            dynamic = check.triggered;
            result.summary.iou_series.push_back({frame.frame_index, frame.altitude_m, check.iou});
        }
        if (frame.altitude_m > 0.0) {
            d.zone = select_zone(assessment.safety, frame.altitude_m, camera, cfg.drone_footprint_m,
                                 frame.image.dim(2));
            if (d.zone) {
                d.zone->x += assessment.window.x;
                d.zone->y += assessment.window.y;
            }
        }
        if (dynamic) {
            d.verdict = Verdict::abort_dynamic;
            ++result.summary.aborts;
            if (!result.summary.first_abort_frame) result.summary.first_abort_frame = d.frame_index;
        } else {
            d.verdict = d.zone ? Verdict::safe : Verdict::unsafe;
        }

        ++result.summary.frames_processed;
        result.summary.pixels_processed += d.pixels_processed;
        if (observer) observer(frame, assessment, d);
        prev_safety = assessment.safety;
        prev_altitude = frame.altitude_m;
        result.decisions.push_back(std::move(d));
    }
    return result;
}

}  // namespace slz
