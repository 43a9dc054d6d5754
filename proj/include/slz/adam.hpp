#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slz/tensor.hpp"

namespace slz {

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    std::vector<Tensor<T>> first_moment;
    std::vector<Tensor<T>> second_moment;
    std::uint64_t step_count = 0;
    AdamHyper hyper;

    /// Zeroed moments shaped like `params`.
    static AdamState fresh(std::span<const Tensor<T>> params, AdamHyper hyper = {});
};

/// One bias-corrected ADAM update applied to `params` in place. Throws
/// std::invalid_argument on any shape mismatch, before touching anything.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads,
               AdamState<T>& state);

}  // namespace slz
