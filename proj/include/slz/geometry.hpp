#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/image.hpp"
#include "slz/mask.hpp"
#include "slz/resample.hpp"
#include "slz/tensor.hpp"

namespace slz {

/// Which extent of the square image the field-of-view angle spans.
enum class FovAxis { side, horizontal, vertical, diagonal };

FovAxis parse_fov_axis(std::string_view name);

/// Nadir pinhole camera over a square image.
struct CameraModel {
    double fov_degrees = 107.0;
    FovAxis axis = FovAxis::side;

    void validate() const;
};

/// Ground width covered by one image side: 2 h tan(fov / 2), reduced by
/// sqrt(2) when the angle spans the diagonal.
double footprint_width(double altitude_m, const CameraModel& camera);

inline constexpr double kDefaultDescentRate = 15.0 / 3.6;  // 15 km/h in m/s
inline constexpr double kDefaultDropPerFrame = 0.10;

/// Frame-index -> altitude law for a constant-speed vertical descent.
struct DescentProfile {
    double fps = 30.0;
    double descent_rate_mps = kDefaultDescentRate;
    /// Overrides descent_rate_mps / fps when set.
    std::optional<double> drop_per_frame = kDefaultDropPerFrame;
    std::size_t landing_frame = 0;

    double step_m() const;
    void validate() const;
};

/// (landing_frame - frame_index) * step. Frames past touchdown are rejected.
double altitude_at(const DescentProfile& profile, std::size_t frame_index);

/// Central window of a w x h raster seen from h_ref that a camera at
/// h_target covers: fraction h_target / h_ref per side, nearest-pixel rounded.
Window backprojection_window(std::size_t width, std::size_t height, double h_ref, double h_target);

/// Crops the reference raster to the target footprint and resamples it back
/// to the reference resolution (nearest for masks, bilinear for images).
Mask backproject_crop(const Mask& reference, double h_ref, double h_target);
SafetyMask backproject_crop(const SafetyMask& reference, double h_ref, double h_target);
RgbImage backproject_crop(const RgbImage& reference, double h_ref, double h_target);
Tensor<float> backproject_crop(const Tensor<float>& reference, double h_ref, double h_target);

struct InterframeIou {
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
    /// Safe-class IOU after collapsing both masks with the scheme.
    double binary = 0.0;
};

/// Compares the prediction at h_high, back-projected to h_low, with the
/// prediction at h_low.
InterframeIou interframe_iou(const Mask& pred_high, const Mask& pred_low, double h_high,
                             double h_low, const ClassScheme& scheme);

/// Safe-class IOU between back-projected `high` and `low`.
double binary_interframe_iou(const SafetyMask& high, const SafetyMask& low, double h_high,
                             double h_low);

}  // namespace slz
