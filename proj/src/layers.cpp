#include "slz/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace slz {

namespace {

using Index = std::ptrdiff_t;

struct ConvShape {
    std::size_t channels, height, width, outputs, kernel;
};

template <typename T>
ConvShape check_conv(const Tensor<T>& input, const Tensor<T>& weights, const char* op) {
    require_chw(input, op);
    if (weights.rank() != 4 || weights.dim(2) != weights.dim(3) || weights.dim(2) % 2 == 0) {
        throw std::invalid_argument(std::string(op) + ": weights must be [O,C,k,k] with odd k, got " +
                                    shape_string(weights.shape()));
    }
    if (weights.dim(1) != input.dim(0)) {
        throw std::invalid_argument(std::string(op) + ": input has " + std::to_string(input.dim(0)) +
                                    " channels but weights expect " +
                                    std::to_string(weights.dim(1)));
    }
    return {input.dim(0), input.dim(1), input.dim(2), weights.dim(0), weights.dim(2)};
}

// Row/column range [lo, hi) where the shifted index stays in bounds.
struct Span {
    Index lo, hi;
};
Span valid(Index extent, Index shift) {
    return {std::max<Index>(0, -shift), std::min<Index>(extent, extent - shift)};
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
    const auto s = check_conv(input, weights, "conv2d");
    if (bias.size() != s.outputs) {
        throw std::invalid_argument("conv2d: bias has " + std::to_string(bias.size()) +
                                    " entries, expected " + std::to_string(s.outputs));
    }
    const Index h = static_cast<Index>(s.height);
    const Index w = static_cast<Index>(s.width);
    const Index pad = static_cast<Index>(s.kernel / 2);
    Tensor<T> out({s.outputs, s.height, s.width});
    for (std::size_t o = 0; o < s.outputs; ++o) {
        T* __restrict dst = out.channel(o);
        std::fill(dst, dst + h * w, bias[o]);
        for (std::size_t c = 0; c < s.channels; ++c) {
            const T* src = input.channel(c);
            const T* kern = weights.data() + (o * s.channels + c) * s.kernel * s.kernel;
            for (Index ky = 0; ky < static_cast<Index>(s.kernel); ++ky) {
                const Index dy = ky - pad;
                const Span rows = valid(h, dy);
                for (Index kx = 0; kx < static_cast<Index>(s.kernel); ++kx) {
                    const Index dx = kx - pad;
                    const Span cols = valid(w, dx);
                    const T k = kern[ky * static_cast<Index>(s.kernel) + kx];
                    for (Index y = rows.lo; y < rows.hi; ++y) {
                        T* __restrict d = dst + y * w;
                        const T* __restrict in = src + (y + dy) * w + dx;
                        for (Index x = cols.lo; x < cols.hi; ++x) d[x] += k * in[x];
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_grad(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& upstream) {
    const auto s = check_conv(input, weights, "conv2d_grad");
    require_chw(upstream, "conv2d_grad");
    if (upstream.dim(0) != s.outputs || upstream.dim(1) != s.height || upstream.dim(2) != s.width) {
        throw std::invalid_argument("conv2d_grad: upstream gradient shape " +
                                    shape_string(upstream.shape()) + " does not match output");
    }
    const Index h = static_cast<Index>(s.height);
    const Index w = static_cast<Index>(s.width);
    const Index k = static_cast<Index>(s.kernel);
    const Index pad = k / 2;
    ConvGrads<T> g{Tensor<T>::zeros_like(input), Tensor<T>::zeros_like(weights),
                   Tensor<T>({s.outputs})};

    for (std::size_t o = 0; o < s.outputs; ++o) {
        const T* up = upstream.channel(o);
        T bias_sum = 0;
        for (Index i = 0; i < h * w; ++i) bias_sum += up[i];
        g.bias[o] = bias_sum;

        for (std::size_t c = 0; c < s.channels; ++c) {
            const T* src = input.channel(c);
            T* gin = g.input.channel(c);
            const std::size_t kbase = (o * s.channels + c) * s.kernel * s.kernel;
            for (Index ky = 0; ky < k; ++ky) {
                const Index dy = ky - pad;
                const Span rows = valid(h, dy);
                for (Index kx = 0; kx < k; ++kx) {
                    const Index dx = kx - pad;
                    const Span cols = valid(w, dx);
                    const T kv = weights[kbase + ky * k + kx];
                    T acc = 0;
                    for (Index y = rows.lo; y < rows.hi; ++y) {
                        const T* __restrict u = up + y * w;
                        const T* __restrict in = src + (y + dy) * w + dx;
                        T* __restrict gi = gin + (y + dy) * w + dx;
#pragma omp simd reduction(+ : acc)
                        for (Index x = cols.lo; x < cols.hi; ++x) {
                            acc += u[x] * in[x];
                            gi[x] += kv * u[x];
                        }
                    }
                    g.weights[kbase + ky * k + kx] = acc;
                }
            }
        }
    }
    return g;
}

template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input) {
    require_chw(input, "maxpool2");
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (h % 2 != 0 || w % 2 != 0) {
        throw std::invalid_argument("maxpool2: height and width must be even, got " +
                                    shape_string(input.shape()));
    }
    PoolResult<T> r{Tensor<T>({c, h / 2, w / 2}), {}};
    r.argmax.resize(r.output.size());
    std::size_t out_i = 0;
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < h / 2; ++y) {
            for (std::size_t x = 0; x < w / 2; ++x, ++out_i) {
                std::size_t best = (ch * h + 2 * y) * w + 2 * x;
                const std::size_t candidates[3] = {best + 1, best + w, best + w + 1};
                for (std::size_t idx : candidates) {
                    if (input[idx] > input[best]) best = idx;
                }
                r.output[out_i] = input[best];
                r.argmax[out_i] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return r;
}

template <typename T>
Tensor<T> maxpool2_grad(const Tensor<T>& upstream, const std::vector<std::uint32_t>& argmax,
                        const std::vector<std::size_t>& input_shape) {
    if (upstream.size() != argmax.size()) {
        throw std::invalid_argument("maxpool2_grad: upstream and argmax sizes differ");
    }
    Tensor<T> g(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += upstream[i];
    return g;
}

namespace {

template <typename T>
void check_upconv(const Tensor<T>& input, const Tensor<T>& weights, const char* op) {
    require_chw(input, op);
    if (weights.rank() != 4 || weights.dim(2) != 2 || weights.dim(3) != 2) {
        throw std::invalid_argument(std::string(op) + ": weights must be [C,O,2,2], got " +
                                    shape_string(weights.shape()));
    }
    if (weights.dim(0) != input.dim(0)) {
        throw std::invalid_argument(std::string(op) + ": input has " + std::to_string(input.dim(0)) +
                                    " channels but weights expect " +
                                    std::to_string(weights.dim(0)));
    }
}

}  // namespace

template <typename T>
Tensor<T> upconv2(const Tensor<T>& input, const Tensor<T>& weights) {
    check_upconv(input, weights, "upconv2");
    const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t cout = weights.dim(1);
    Tensor<T> out({cout, 2 * h, 2 * w});
    for (std::size_t c = 0; c < cin; ++c) {
        const T* src = input.channel(c);
        for (std::size_t o = 0; o < cout; ++o) {
            const T* kern = weights.data() + (c * cout + o) * 4;
            T* dst = out.channel(o);
            for (std::size_t y = 0; y < h; ++y) {
                T* r0 = dst + (2 * y) * (2 * w);
                T* r1 = r0 + 2 * w;
                for (std::size_t x = 0; x < w; ++x) {
                    const T v = src[y * w + x];
                    r0[2 * x] += v * kern[0];
                    r0[2 * x + 1] += v * kern[1];
                    r1[2 * x] += v * kern[2];
                    r1[2 * x + 1] += v * kern[3];
                }
            }
        }
    }
    return out;
}

template <typename T>
UpconvGrads<T> upconv2_grad(const Tensor<T>& input, const Tensor<T>& weights,
                            const Tensor<T>& upstream) {
    check_upconv(input, weights, "upconv2_grad");
    const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t cout = weights.dim(1);
    require_chw(upstream, "upconv2_grad");
    if (upstream.dim(0) != cout || upstream.dim(1) != 2 * h || upstream.dim(2) != 2 * w) {
        throw std::invalid_argument("upconv2_grad: upstream gradient shape " +
                                    shape_string(upstream.shape()) + " does not match output");
    }
    UpconvGrads<T> g{Tensor<T>::zeros_like(input), Tensor<T>::zeros_like(weights)};
    for (std::size_t c = 0; c < cin; ++c) {
        const T* src = input.channel(c);
        T* gin = g.input.channel(c);
        for (std::size_t o = 0; o < cout; ++o) {
            const T* kern = weights.data() + (c * cout + o) * 4;
            T* gk = g.weights.data() + (c * cout + o) * 4;
            const T* up = upstream.channel(o);
            T a0 = 0, a1 = 0, a2 = 0, a3 = 0;
            for (std::size_t y = 0; y < h; ++y) {
                const T* r0 = up + (2 * y) * (2 * w);
                const T* r1 = r0 + 2 * w;
                for (std::size_t x = 0; x < w; ++x) {
                    const T v = src[y * w + x];
                    a0 += v * r0[2 * x];
                    a1 += v * r0[2 * x + 1];
                    a2 += v * r1[2 * x];
                    a3 += v * r1[2 * x + 1];
                    gin[y * w + x] += kern[0] * r0[2 * x] + kern[1] * r0[2 * x + 1] +
                                      kern[2] * r1[2 * x] + kern[3] * r1[2 * x + 1];
                }
            }
            gk[0] = a0;
            gk[1] = a1;
            gk[2] = a2;
            gk[3] = a3;
        }
    }
    return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
    Tensor<T> out = input;
    for (auto& v : out.values()) v = v > T{0} ? v : T{0};
    return out;
}

template <typename T>
Tensor<T> relu_grad(const Tensor<T>& input, const Tensor<T>& upstream) {
    if (input.shape() != upstream.shape()) {
        throw std::invalid_argument("relu_grad: shape mismatch " + shape_string(input.shape()) +
                                    " vs " + shape_string(upstream.shape()));
    }
    Tensor<T> g = upstream;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(input[i] > T{0})) g[i] = T{0};
    }
    return g;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    require_chw(a, "concat_channels");
    require_chw(b, "concat_channels");
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
        throw std::invalid_argument("concat_channels: spatial mismatch " +
                                    shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
    Tensor<T> out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::copy(a.data(), a.data() + a.size(), out.data());
    std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
    return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& upstream,
                                               std::size_t a_channels) {
    require_chw(upstream, "split_channels");
    if (a_channels == 0 || a_channels >= upstream.dim(0)) {
        throw std::invalid_argument("split_channels: split point " + std::to_string(a_channels) +
                                    " outside (0, " + std::to_string(upstream.dim(0)) + ")");
    }
    const std::size_t plane = upstream.dim(1) * upstream.dim(2);
    Tensor<T> a({a_channels, upstream.dim(1), upstream.dim(2)});
    Tensor<T> b({upstream.dim(0) - a_channels, upstream.dim(1), upstream.dim(2)});
    std::copy(upstream.data(), upstream.data() + a_channels * plane, a.data());
    std::copy(upstream.data() + a_channels * plane, upstream.data() + upstream.size(), b.data());
    return {std::move(a), std::move(b)};
}

template <typename T>
Tensor<T> softmax_pixels(const Tensor<T>& logits) {
    require_chw(logits, "softmax_pixels");
    const std::size_t k = logits.dim(0);
    if (k < 2) throw std::invalid_argument("softmax_pixels: need at least 2 classes");
    const std::size_t plane = logits.dim(1) * logits.dim(2);
    Tensor<T> out = Tensor<T>::zeros_like(logits);
    for (std::size_t p = 0; p < plane; ++p) {
        T peak = logits[p];
        for (std::size_t c = 1; c < k; ++c) peak = std::max(peak, logits[c * plane + p]);
        T total = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const T e = std::exp(logits[c * plane + p] - peak);
            out[c * plane + p] = e;
            total += e;
        }
        for (std::size_t c = 0; c < k; ++c) out[c * plane + p] /= total;
    }
    return out;
}

template <typename T>
CceResult<T> cce_loss(const Tensor<T>& probabilities, const Mask& labels,
                      std::optional<std::uint8_t> ignore_label) {
    require_chw(probabilities, "cce_loss");
    const std::size_t k = probabilities.dim(0);
    if (labels.height != probabilities.dim(1) || labels.width != probabilities.dim(2)) {
        throw std::invalid_argument("cce_loss: label mask is " + std::to_string(labels.width) +
                                    "x" + std::to_string(labels.height) +
                                    " but probabilities are " +
                                    shape_string(probabilities.shape()));
    }
    const std::size_t plane = labels.area();
    std::size_t counted = 0;
    for (std::size_t p = 0; p < plane; ++p) {
        const auto label = labels.cells[p];
        if (ignore_label && label == *ignore_label) continue;
        if (label >= k) {
            throw std::invalid_argument("cce_loss: label " + std::to_string(label) + " at pixel " +
                                        std::to_string(p) + " is outside [0, " +
                                        std::to_string(k) + ")");
        }
        ++counted;
    }

    CceResult<T> r{T{0}, Tensor<T>::zeros_like(probabilities), counted};
    if (counted == 0) return r;
    const T inv_n = T{1} / static_cast<T>(counted);
    double total = 0;
    for (std::size_t p = 0; p < plane; ++p) {
        const auto label = labels.cells[p];
        if (ignore_label && label == *ignore_label) continue;
        const double prob = std::max<double>(probabilities[label * plane + p], kProbabilityFloor);
        total -= std::log(prob);
        for (std::size_t c = 0; c < k; ++c) {
            r.grad_logits[c * plane + p] = probabilities[c * plane + p] * inv_n;
        }
        r.grad_logits[label * plane + p] -= inv_n;
    }
    r.loss = static_cast<T>(total / static_cast<double>(counted));
    return r;
}

#define SLZ_INSTANTIATE_LAYERS(T)                                                              \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
    template ConvGrads<T> conv2d_grad(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
    template PoolResult<T> maxpool2(const Tensor<T>&);                                          \
    template Tensor<T> maxpool2_grad(const Tensor<T>&, const std::vector<std::uint32_t>&,       \
                                     const std::vector<std::size_t>&);                          \
    template Tensor<T> upconv2(const Tensor<T>&, const Tensor<T>&);                             \
    template UpconvGrads<T> upconv2_grad(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
    template Tensor<T> relu(const Tensor<T>&);                                                  \
    template Tensor<T> relu_grad(const Tensor<T>&, const Tensor<T>&);                           \
    template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                     \
    template std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>&, std::size_t);     \
    template Tensor<T> softmax_pixels(const Tensor<T>&);                                        \
    template CceResult<T> cce_loss(const Tensor<T>&, const Mask&, std::optional<std::uint8_t>);

SLZ_INSTANTIATE_LAYERS(float)
SLZ_INSTANTIATE_LAYERS(double)

}  // namespace slz
