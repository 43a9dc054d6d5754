#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/geometry.hpp"
#include "slz/mask.hpp"
#include "slz/resample.hpp"
#include "slz/tensor.hpp"
#include "slz/unet.hpp"

namespace slz {

struct FrameRecord {
    std::size_t frame_index = 0;
    double altitude_m = 0.0;
    Tensor<float> image;  ///< [3,H,W]
    /// Ground truth in output-class IDs, when the run is synthetic.
    std::optional<Mask> truth;
};

/// Produces a class mask for `window` of a frame.
struct Segmenter {
    std::function<Mask(const FrameRecord&, const Window&)> segment;
    std::size_t num_classes = 0;
    /// Window sides must be multiples of this.
    std::size_t size_multiple = 1;
};

Segmenter unet_segmenter(UNetParams<float> params);

/// Returns the frame's ground truth; frames without one are rejected.
Segmenter oracle_segmenter(std::size_t num_classes);

struct PipelineConfig {
    std::size_t stride = 1;
    double crop_fraction = 1.0;
    double dynamic_iou_threshold = 0.84;
    double drone_footprint_m = 1.0;
    ClassScheme scheme;

    void validate() const;
};

enum class Verdict { safe, unsafe, abort_dynamic };
std::string_view to_string(Verdict v);

/// Axis-aligned square in frame pixel coordinates.
struct LandingZone {
    std::size_t x = 0;  ///< left
    std::size_t y = 0;  ///< top
    std::size_t side_px = 0;
    double side_m = 0.0;

    double center_x() const { return static_cast<double>(x) + 0.5 * static_cast<double>(side_px); }
    double center_y() const { return static_cast<double>(y) + 0.5 * static_cast<double>(side_px); }
    bool operator==(const LandingZone&) const = default;
};

struct LandingDecision {
    std::size_t frame_index = 0;
    double altitude_m = 0.0;
    Verdict verdict = Verdict::unsafe;
    std::optional<LandingZone> zone;
    std::optional<double> interframe_binary_iou;
    std::uint64_t pixels_processed = 0;
};

struct FrameAssessment {
    Window window;  ///< processed region in frame coordinates
    Mask classes;
    SafetyMask safety;
    std::uint64_t pixels_processed = 0;
};

/// Centered crop covering crop_fraction per side, grown to the next multiple
/// of `multiple` (or shrunk to the previous one when growing would leave the
/// frame).
Window processing_window(std::size_t width, std::size_t height, double crop_fraction,
                         std::size_t multiple);

FrameAssessment assess_frame(const Segmenter& segmenter, const FrameRecord& frame,
                             const PipelineConfig& cfg);

struct DynamicCheck {
    bool triggered = false;
    double iou = 1.0;
};

/// Safe-class IOU of `prev` back-projected onto `curr`; triggers below threshold.
DynamicCheck detect_dynamic(const SafetyMask& prev, const SafetyMask& curr, double h_prev,
                            double h_curr, double threshold);

struct SquareRegion {
    std::size_t x = 0, y = 0, side = 0;
};

/// Largest all-safe axis-aligned square (dynamic programming); ties go to
/// the topmost, then leftmost, corner. side == 0 when nothing is safe.
SquareRegion largest_safe_square(const SafetyMask& safety);

/// The largest safe square if it is at least required_side_m wide. Meters per
/// pixel come from the footprint at `altitude_m` spread over `frame_side_px`
/// (defaults to the mask width).
std::optional<LandingZone> select_zone(const SafetyMask& safety, double altitude_m,
                                       const CameraModel& camera, double required_side_m,
                                       std::optional<std::size_t> frame_side_px = std::nullopt);

/// Random access to the frames of a descent, ordered by decreasing altitude.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::size_t size() const = 0;
    virtual FrameRecord load(std::size_t position) const = 0;
};

class InMemoryFrames final : public FrameSource {
public:
    explicit InMemoryFrames(std::vector<FrameRecord> frames) : frames_(std::move(frames)) {}
    std::size_t size() const override { return frames_.size(); }
    FrameRecord load(std::size_t position) const override { return frames_.at(position); }

private:
    std::vector<FrameRecord> frames_;
};

struct IouSample {
    std::size_t frame_index = 0;
    double altitude_m = 0.0;
    double iou = 0.0;
};

struct DescentSummary {
    std::size_t frames_total = 0;
    std::size_t frames_processed = 0;
    std::uint64_t pixels_processed = 0;
    std::size_t aborts = 0;
    std::optional<std::size_t> first_abort_frame;
    std::vector<IouSample> iou_series;  ///< inter-frame binary IOU vs altitude
};

struct DescentResult {
    std::vector<LandingDecision> decisions;
    DescentSummary summary;
};

using FrameObserver = std::function<void(const FrameRecord&, const FrameAssessment&,
                                         const LandingDecision&)>;

/// Processes every stride-th frame (positions 0, s, 2s, ...). Verdict
/// precedence: abort_dynamic, then unsafe (no qualifying zone), then safe.
DescentResult run_descent(const Segmenter& segmenter, const FrameSource& frames,
                          const PipelineConfig& cfg, const CameraModel& camera,
                          const FrameObserver& observer = {});

}  // namespace slz
