#include "slz/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace slz {

namespace {

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* op) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument(std::string(op) + ": masks differ in size (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height) + ")");
    }
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) s += at(truth, j);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, pred);
    return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.k_ != k_) throw std::invalid_argument("confusion matrices differ in class count");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

ConfusionMatrix confusion(const Mask& pred, const Mask& truth, std::size_t classes) {
    require_same_size(pred, truth, "confusion");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < pred.cells.size(); ++i) {
        const auto p = pred.cells[i];
        const auto t = truth.cells[i];
        if (p >= classes || t >= classes) {
            throw std::invalid_argument("confusion: class ID " + std::to_string(std::max(p, t)) +
                                        " at pixel " + std::to_string(i) + " outside [0, " +
                                        std::to_string(classes) + ")");
        }
        ++cm.at(t, p);
    }
    return cm;
}

IouResult iou(const ConfusionMatrix& cm) {
    IouResult r;
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const auto tp = cm.at(c, c);
        const auto uni = cm.row_sum(c) + cm.col_sum(c) - tp;
        if (uni == 0) {
            r.per_class.emplace_back();
            ++r.undefined_classes;
            continue;
        }
        const double v = static_cast<double>(tp) / static_cast<double>(uni);
        r.per_class.emplace_back(v);
        sum += v;
        ++defined;
    }
    r.mean = defined ? sum / static_cast<double>(defined) : 0.0;
    return r;
}

SafetyMask to_binary(const Mask& mask, const ClassScheme& scheme) {
    SafetyMask s(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.cells.size(); ++i) {
        const auto id = mask.cells[i];
        if (id >= scheme.num_classes()) {
            throw std::invalid_argument("to_binary: class ID " + std::to_string(id) +
                                        " outside scheme " + scheme.name);
        }
        s.cells[i] = scheme.is_safe(id) ? 1 : 0;
    }
    return s;
}

FprResult fpr(const SafetyMask& pred, const SafetyMask& truth) {
    require_same_size(pred, truth, "fpr");
    FprResult r;
    for (std::size_t i = 0; i < pred.cells.size(); ++i) {
        if (truth.cells[i]) continue;
        if (pred.cells[i]) {
            ++r.false_positives;
        } else {
            ++r.true_negatives;
        }
    }
    const auto negatives = r.false_positives + r.true_negatives;
    if (negatives == 0) {
        r.undefined_denominator = true;
    } else {
        r.value = static_cast<double>(r.false_positives) / static_cast<double>(negatives);
    }
    return r;
}

double pixel_agreement(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw std::invalid_argument("pixel_agreement of an empty confusion matrix");
    std::uint64_t diag = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) diag += cm.at(c, c);
    return static_cast<double>(diag) / static_cast<double>(total);
}

double safe_iou(const SafetyMask& a, const SafetyMask& b) {
    require_same_size(a, b, "safe_iou");
    std::uint64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const bool sa = a.cells[i] != 0, sb = b.cells[i] != 0;
        inter += sa && sb;
        uni += sa || sb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace slz
