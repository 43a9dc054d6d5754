#include "slz/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "slz/metrics.hpp"

namespace slz {

FovAxis parse_fov_axis(std::string_view name) {
    if (name == "side") return FovAxis::side;
    if (name == "horizontal") return FovAxis::horizontal;
    if (name == "vertical") return FovAxis::vertical;
    if (name == "diagonal") return FovAxis::diagonal;
    throw std::invalid_argument("unknown field-of-view axis '" + std::string(name) + "'");
}

void CameraModel::validate() const {
    if (!(fov_degrees > 0.0 && fov_degrees < 180.0)) {
        throw std::invalid_argument("field of view must lie in (0, 180) degrees, got " +
                                    std::to_string(fov_degrees));
    }
}

double footprint_width(double altitude_m, const CameraModel& camera) {
    camera.validate();
    if (altitude_m < 0.0) throw std::invalid_argument("altitude must be non-negative");
    const double half = camera.fov_degrees * std::numbers::pi / 360.0;
    const double span = 2.0 * altitude_m * std::tan(half);
    return camera.axis == FovAxis::diagonal ? span / std::numbers::sqrt2 : span;
}

double DescentProfile::step_m() const {
    return drop_per_frame ? *drop_per_frame : descent_rate_mps / fps;
}

void DescentProfile::validate() const {
    if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
    if (!(step_m() > 0.0)) throw std::invalid_argument("drop per frame must be positive");
}

double altitude_at(const DescentProfile& profile, std::size_t frame_index) {
    profile.validate();
    if (frame_index > profile.landing_frame) {
        throw std::invalid_argument("frame " + std::to_string(frame_index) +
                                    " is after the landing frame " +
                                    std::to_string(profile.landing_frame));
    }
    return static_cast<double>(profile.landing_frame - frame_index) * profile.step_m();
}

Window backprojection_window(std::size_t width, std::size_t height, double h_ref,
                             double h_target) {
    if (!(h_target > 0.0)) throw std::invalid_argument("target altitude must be positive");
    if (h_target > h_ref) {
        throw std::invalid_argument("target altitude " + std::to_string(h_target) +
                                    " m is above the reference altitude " +
                                    std::to_string(h_ref) + " m");
    }
    return centered_window(width, height, h_target / h_ref);
}

Mask backproject_crop(const Mask& reference, double h_ref, double h_target) {
    const auto w = backprojection_window(reference.width, reference.height, h_ref, h_target);
    return crop_resize_nearest(reference, w, reference.width, reference.height);
}

SafetyMask backproject_crop(const SafetyMask& reference, double h_ref, double h_target) {
    const auto w = backprojection_window(reference.width, reference.height, h_ref, h_target);
    return crop_resize_nearest(reference, w, reference.width, reference.height);
}

RgbImage backproject_crop(const RgbImage& reference, double h_ref, double h_target) {
    const auto w = backprojection_window(reference.width, reference.height, h_ref, h_target);
    return crop_resize_bilinear(reference, w, reference.width, reference.height);
}

Tensor<float> backproject_crop(const Tensor<float>& reference, double h_ref, double h_target) {
    require_chw(reference, "backproject_crop");
    const auto w = backprojection_window(reference.dim(2), reference.dim(1), h_ref, h_target);
    return crop_resize_bilinear(reference, w, reference.dim(2), reference.dim(1));
}

InterframeIou interframe_iou(const Mask& pred_high, const Mask& pred_low, double h_high,
                             double h_low, const ClassScheme& scheme) {
    const Mask projected = backproject_crop(pred_high, h_high, h_low);
    const auto multi = iou(confusion(pred_low, projected, scheme.num_classes()));
    InterframeIou r;
    r.per_class = multi.per_class;
    r.mean = multi.mean;
    r.binary = safe_iou(to_binary(projected, scheme), to_binary(pred_low, scheme));
    return r;
}

double binary_interframe_iou(const SafetyMask& high, const SafetyMask& low, double h_high,
                             double h_low) {
    return safe_iou(backproject_crop(high, h_high, h_low), low);
}

}  // namespace slz
