#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "slz/mask.hpp"
#include "slz/tensor.hpp"

// Layer kernels for the segmentation network. Every forward op has a matching
// analytic gradient; all tensors are [C,H,W] unless stated otherwise.
namespace slz {

/// Stride-1 convolution with "same" zero padding of (k-1)/2.
/// weights: [O,C,k,k] with k odd; bias: [O].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias);

template <typename T>
struct ConvGrads {
    Tensor<T> input;
    Tensor<T> weights;
    Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_grad(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& upstream);

template <typename T>
struct PoolResult {
    Tensor<T> output;
    /// Flat index into the input tensor of each output cell's maximum.
    std::vector<std::uint32_t> argmax;
};

/// 2x2 max pooling, stride 2. Ties go to the first position in row-major
/// window order.
template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2_grad(const Tensor<T>& upstream, const std::vector<std::uint32_t>& argmax,
                        const std::vector<std::size_t>& input_shape);

/// Transposed 2x2 convolution with stride 2; weights [C,O,2,2], no bias.
template <typename T>
Tensor<T> upconv2(const Tensor<T>& input, const Tensor<T>& weights);

template <typename T>
struct UpconvGrads {
    Tensor<T> input;
    Tensor<T> weights;
};

template <typename T>
UpconvGrads<T> upconv2_grad(const Tensor<T>& input, const Tensor<T>& weights,
                            const Tensor<T>& upstream);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_grad(const Tensor<T>& input, const Tensor<T>& upstream);

/// Stacks `a` then `b` along the channel axis.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Splits a concat gradient into the first `a_channels` channels and the rest.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& upstream,
                                               std::size_t a_channels);

/// Per-pixel softmax over the channel axis (max-subtracted).
template <typename T>
Tensor<T> softmax_pixels(const Tensor<T>& logits);

template <typename T>
struct CceResult {
    T loss = 0;
    /// Gradient with respect to the pre-softmax logits.
    Tensor<T> grad_logits;
    std::size_t counted_pixels = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean categorical cross-entropy over non-ignored pixels, plus the fused
/// softmax gradient (p - onehot) / N.
template <typename T>
CceResult<T> cce_loss(const Tensor<T>& probabilities, const Mask& labels,
                      std::optional<std::uint8_t> ignore_label = std::nullopt);

}  // namespace slz
