#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "slz/class_scheme.hpp"
#include "slz/mask.hpp"

namespace slz {

/// K x K pixel counts; entry (i, j) counts pixels with truth i predicted j.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return k_; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
    std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * k_ + pred]; }
    std::uint64_t total() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t pred) const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t k_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(const Mask& pred, const Mask& truth, std::size_t classes);

struct IouResult {
    /// Empty where the class has zero union (absent from both masks).
    std::vector<std::optional<double>> per_class;
    /// Unweighted mean over classes with a defined IOU.
    double mean = 0.0;
    std::size_t undefined_classes = 0;
};

/// Jaccard index per class: tp / (row + col - tp).
IouResult iou(const ConfusionMatrix& cm);

/// Fraction of pixels whose labels match: trace / total. Whole-mask
/// agreement, insensitive to how the mismatch splits across classes.
double pixel_agreement(const ConfusionMatrix& cm);

/// Pixel is safe iff its output class is in scheme.safe_set.
SafetyMask to_binary(const Mask& mask, const ClassScheme& scheme);

struct FprResult {
    double value = 0.0;
    std::uint64_t false_positives = 0;
    std::uint64_t true_negatives = 0;
    /// Truth had no unsafe pixels; value is reported as 0.
    bool undefined_denominator = false;
};

/// FP / (FP + TN) where a false positive is an unsafe pixel predicted safe.
FprResult fpr(const SafetyMask& pred, const SafetyMask& truth);

/// IOU of the safe class between two safety masks; 1 when neither has a
/// safe pixel (the masks agree everywhere).
double safe_iou(const SafetyMask& a, const SafetyMask& b);

}  // namespace slz
