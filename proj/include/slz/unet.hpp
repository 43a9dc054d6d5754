#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slz/adam.hpp"
#include "slz/labeled_tile.hpp"
#include "slz/mask.hpp"
#include "slz/tensor.hpp"

namespace slz {

/// Architectural hyperparameters of the encoder-decoder network.
struct UNetConfig {
    std::uint32_t depth = 2;          ///< pooling stages
    std::uint32_t base_channels = 8;  ///< width of the first encoder stage
    std::uint32_t in_channels = 3;
    std::uint32_t num_classes = 5;
    std::uint64_t seed = 0;

    /// Input height and width must be multiples of this (2^depth).
    std::size_t size_multiple() const { return std::size_t{1} << depth; }
    void validate() const;

    bool operator==(const UNetConfig&) const = default;
};

struct ParamSpec {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t fan_in = 0;  ///< 0 for biases (zero-initialized)
};

/// Ordered parameter list; a pure function of the config (seed excluded).
std::vector<ParamSpec> parameter_layout(const UNetConfig& config);

template <typename T>
struct UNetParams {
    UNetConfig config;
    std::vector<std::string> names;
    std::vector<Tensor<T>> tensors;

    std::size_t parameter_count() const;
    const Tensor<T>& get(const std::string& name) const;

    template <typename U>
    UNetParams<U> cast() const {
        UNetParams<U> out{config, names, {}};
        for (const auto& t : tensors) out.tensors.push_back(t.template cast<U>());
        return out;
    }

    bool operator==(const UNetParams&) const = default;
};

/// Fan-in-scaled uniform weights (He bound sqrt(6 / fan_in)), zero biases,
/// drawn from a generator seeded only by config.seed.
template <typename T>
UNetParams<T> build(const UNetConfig& config);

/// Per-pixel class probabilities [K,H,W] for an image [3,H,W].
template <typename T>
Tensor<T> forward(const UNetParams<T>& params, const Tensor<T>& image);

template <typename T>
struct LossAndGradient {
    T loss = 0;
    std::vector<Tensor<T>> grads;  ///< aligned with params.tensors
    Tensor<T> probabilities;
};

/// Mean cross-entropy of one image against `labels`, with the gradient of
/// every parameter.
template <typename T>
LossAndGradient<T> loss_and_gradient(const UNetParams<T>& params, const Tensor<T>& image,
                                     const Mask& labels,
                                     std::optional<std::uint8_t> ignore_label = std::nullopt);

/// Argmax over channels; ties resolve to the lowest class index.
template <typename T>
Mask argmax_mask(const Tensor<T>& probabilities);

template <typename T>
Mask predict_mask(const UNetParams<T>& params, const Tensor<T>& image);

struct TrainHyper {
    std::size_t epochs = 1;
    std::size_t batch_size = 1;
    std::uint64_t shuffle_seed = 0;
    AdamHyper adam;
    std::optional<std::uint8_t> ignore_label;
};

template <typename T>
struct TrainResult {
    UNetParams<T> params;
    std::vector<double> loss_history;  ///< mean batch loss per ADAM step
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

/// Mini-batch ADAM training; the gradient of a batch is the mean over its
/// tiles. Sequential and deterministic for fixed (params, tiles, hyper).
template <typename T>
TrainResult<T> train(UNetParams<T> params, std::span<const LabeledTile> tiles,
                     const TrainHyper& hyper, const StepCallback& on_step = {});

extern template struct UNetParams<float>;
extern template struct UNetParams<double>;

}  // namespace slz
