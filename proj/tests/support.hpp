#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slz/mask.hpp"
#include "slz/tensor.hpp"
#include "slz/unet.hpp"

namespace slz::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);  ///< inclusive

Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                             double hi = 1.0);
/// Values bounded away from zero by `margin` (for ReLU checks).
Tensor<double> away_from_zero(std::vector<std::size_t> shape, Rng& rng, double margin = 0.05);
/// Distinct values spaced `gap` apart in shuffled order (for max-pool checks).
Tensor<double> distinct_values(std::vector<std::size_t> shape, Rng& rng, double gap = 0.02);
Mask random_mask(std::size_t w, std::size_t h, std::size_t classes, Rng& rng);
/// Few large rectangles and disks painted over a random background class.
Mask blob_mask(std::size_t w, std::size_t h, std::size_t classes, Rng& rng);

double dot(const Tensor<double>& a, const Tensor<double>& b);

/// |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

/// Max relative error between `analytic` and central differences of `loss`
/// around `x`, over every element.
double max_fd_error(const Tensor<double>& x, const Tensor<double>& analytic,
                    const std::function<double(const Tensor<double>&)>& loss, double h = 1e-3);

struct LayerCheck {
    std::string layer;
    std::size_t shapes = 0;
    double worst = 0.0;
};

/// Finite-difference checks of every layer's gradient over `shapes` random
/// shapes each. Loss is <layer output, R> for a random R, so the upstream
/// gradient is R.
std::vector<LayerCheck> layer_gradient_checks(std::uint64_t seed, std::size_t shapes = 10);

struct SpotCheck {
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
    double worst = 0.0;
};

/// Central-difference spot check of `count` random parameters of a depth-1
/// network's cross-entropy loss. Parameters whose one-sided differences
/// disagree (a ReLU or max-pool switch inside [-h, h]) are redrawn.
SpotCheck unet_spot_check(std::uint64_t seed, std::size_t count = 24, double h = 1e-5);

// Brute-force metric oracles: straight pixel loops, no shared code with slz.
struct OracleIou {
    std::vector<std::uint64_t> tp, fp, fn;
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
};
OracleIou oracle_iou(const Mask& pred, const Mask& truth, std::size_t classes);
std::vector<std::vector<std::uint64_t>> oracle_confusion(const Mask& pred, const Mask& truth,
                                                         std::size_t classes);
struct OracleFpr {
    std::uint64_t fp = 0, tn = 0;
    double value = 0.0;
};
OracleFpr oracle_fpr(const std::vector<bool>& pred_safe, const std::vector<bool>& truth_safe);

/// Brute-force largest all-true square (side, top, left), topmost then leftmost.
struct OracleSquare {
    std::size_t side = 0, x = 0, y = 0;
};
OracleSquare oracle_square(const std::vector<std::vector<bool>>& safe);

}  // namespace slz::testing
