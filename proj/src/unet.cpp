#include "slz/unet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "slz/layers.hpp"

namespace slz {

void UNetConfig::validate() const {
    if (depth < 1 || depth > 8) throw std::invalid_argument("unet depth must be in [1, 8]");
    if (base_channels < 1) throw std::invalid_argument("unet base_channels must be >= 1");
    if (in_channels != 3) throw std::invalid_argument("unet input must have 3 channels");
    if (num_classes < 2 || num_classes > 255) {
        throw std::invalid_argument("unet num_classes must be in [2, 255]");
    }
}

std::vector<ParamSpec> parameter_layout(const UNetConfig& config) {
    config.validate();
    std::vector<ParamSpec> specs;
    auto conv = [&specs](const std::string& name, std::size_t in, std::size_t out,
                         std::size_t k) {
        specs.push_back({name + ".weight", {out, in, k, k}, in * k * k});
        specs.push_back({name + ".bias", {out}, 0});
    };
    const std::size_t base = config.base_channels;
    std::size_t in = config.in_channels;
    for (std::uint32_t i = 0; i < config.depth; ++i) {
        const std::size_t width = base << i;
        const std::string stage = "enc" + std::to_string(i);
        conv(stage + ".conv1", in, width, 3);
        conv(stage + ".conv2", width, width, 3);
        in = width;
    }
    const std::size_t bottom = base << config.depth;
    conv("bottleneck.conv1", in, bottom, 3);
    conv("bottleneck.conv2", bottom, bottom, 3);
    in = bottom;
    for (std::uint32_t i = config.depth; i-- > 0;) {
        const std::size_t width = base << i;
        const std::string stage = "dec" + std::to_string(i);
        specs.push_back({stage + ".up.weight", {in, width, 2, 2}, in});
        conv(stage + ".conv1", 2 * width, width, 3);
        conv(stage + ".conv2", width, width, 3);
        in = width;
    }
    conv("head", in, config.num_classes, 1);
    return specs;
}

template <typename T>
std::size_t UNetParams<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
}

template <typename T>
const Tensor<T>& UNetParams<T>::get(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no parameter named " + name);
    return tensors[static_cast<std::size_t>(it - names.begin())];
}

template <typename T>
UNetParams<T> build(const UNetConfig& config) {
    UNetParams<T> params{config, {}, {}};
    std::mt19937_64 rng(config.seed);
    for (auto& spec : parameter_layout(config)) {
        Tensor<T> t(spec.shape);
        if (spec.fan_in > 0) {
            const double bound = std::sqrt(6.0 / static_cast<double>(spec.fan_in));
            for (auto& v : t.values()) {
                const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                v = static_cast<T>((2.0 * unit - 1.0) * bound);
            }
        }
        params.names.push_back(std::move(spec.name));
        params.tensors.push_back(std::move(t));
    }
    return params;
}

namespace {

// Activations of one conv-relu-conv-relu block, kept for the backward pass.
template <typename T>
struct BlockCache {
    Tensor<T> input, pre1, act1, pre2, out;
};

template <typename T>
struct ForwardCache {
    std::vector<BlockCache<T>> encoder;
    std::vector<std::vector<std::uint32_t>> pool_argmax;
    BlockCache<T> bottleneck;
    std::vector<Tensor<T>> up_inputs;  // indexed by decoder stage (depth-1 .. 0 order)
    std::vector<BlockCache<T>> decoder;
    Tensor<T> probabilities;
};

// Walks the parameter list in layout order.
template <typename T>
class Cursor {
public:
    explicit Cursor(const UNetParams<T>& p) : p_(p) {}
    std::size_t index() const { return i_; }
    const Tensor<T>& next() { return p_.tensors.at(i_++); }

private:
    const UNetParams<T>& p_;
    std::size_t i_ = 0;
};

template <typename T>
BlockCache<T> block_forward(Cursor<T>& cur, Tensor<T> input) {
    BlockCache<T> c;
    c.input = std::move(input);
    const auto& w1 = cur.next();
    const auto& b1 = cur.next();
    c.pre1 = conv2d(c.input, w1, b1);
    c.act1 = relu(c.pre1);
    const auto& w2 = cur.next();
    const auto& b2 = cur.next();
    c.pre2 = conv2d(c.act1, w2, b2);
    c.out = relu(c.pre2);
    return c;
}

template <typename T>
void check_input(const UNetParams<T>& params, const Tensor<T>& image) {
    require_chw(image, "unet forward");
    if (image.dim(0) != params.config.in_channels) {
        throw std::invalid_argument("unet forward: image has " + std::to_string(image.dim(0)) +
                                    " channels, expected " +
                                    std::to_string(params.config.in_channels));
    }
    const std::size_t m = params.config.size_multiple();
    if (image.dim(1) % m != 0 || image.dim(2) % m != 0) {
        throw std::invalid_argument("unet forward: input " + std::to_string(image.dim(2)) + "x" +
                                    std::to_string(image.dim(1)) +
                                    " must have height and width divisible by " +
                                    std::to_string(m) + " (2^depth)");
    }
}

template <typename T>
ForwardCache<T> forward_cached(const UNetParams<T>& params, const Tensor<T>& image) {
    check_input(params, image);
    const std::uint32_t depth = params.config.depth;
    ForwardCache<T> fc;
    Cursor<T> cur(params);
    Tensor<T> x = image;
    for (std::uint32_t i = 0; i < depth; ++i) {
        fc.encoder.push_back(block_forward(cur, std::move(x)));
        auto pooled = maxpool2(fc.encoder.back().out);
        fc.pool_argmax.push_back(std::move(pooled.argmax));
        x = std::move(pooled.output);
    }
    fc.bottleneck = block_forward(cur, std::move(x));
    x = fc.bottleneck.out;
    for (std::uint32_t s = 0; s < depth; ++s) {
        const std::uint32_t i = depth - 1 - s;
        const auto& up_w = cur.next();
        Tensor<T> up = upconv2(x, up_w);
        fc.up_inputs.push_back(std::move(x));
        fc.decoder.push_back(block_forward(cur, concat_channels(fc.encoder[i].out, up)));
        x = fc.decoder.back().out;
    }
    const auto& head_w = cur.next();
    const auto& head_b = cur.next();
    fc.probabilities = softmax_pixels(conv2d(x, head_w, head_b));
    return fc;
}

// Returns the gradient with respect to the block input; writes parameter
// gradients at [first, first + 4).
template <typename T>
Tensor<T> block_backward(const UNetParams<T>& params, std::size_t first, const BlockCache<T>& c,
                         const Tensor<T>& upstream, std::vector<Tensor<T>>& grads) {
    auto g2 = conv2d_grad(c.act1, params.tensors[first + 2], relu_grad(c.pre2, upstream));
    grads[first + 2] = std::move(g2.weights);
    grads[first + 3] = std::move(g2.bias);
    auto g1 = conv2d_grad(c.input, params.tensors[first], relu_grad(c.pre1, g2.input));
    grads[first] = std::move(g1.weights);
    grads[first + 1] = std::move(g1.bias);
    return std::move(g1.input);
}

}  // namespace

template <typename T>
Tensor<T> forward(const UNetParams<T>& params, const Tensor<T>& image) {
    return forward_cached(params, image).probabilities;
}

template <typename T>
LossAndGradient<T> loss_and_gradient(const UNetParams<T>& params, const Tensor<T>& image,
                                     const Mask& labels, std::optional<std::uint8_t> ignore_label) {
    const auto fc = forward_cached(params, image);
    auto cce = cce_loss(fc.probabilities, labels, ignore_label);

    const std::uint32_t depth = params.config.depth;
    const std::size_t n = params.tensors.size();
    std::vector<Tensor<T>> grads(n);

    // Layout: 4 per encoder stage, 4 bottleneck, 5 per decoder stage, 2 head.
    const std::size_t bottleneck_first = 4 * depth;
    const std::size_t decoder_first = bottleneck_first + 4;
    const std::size_t head_first = n - 2;

    auto gh = conv2d_grad(fc.decoder.back().out, params.tensors[head_first], cce.grad_logits);
    grads[head_first] = std::move(gh.weights);
    grads[head_first + 1] = std::move(gh.bias);
    Tensor<T> g = std::move(gh.input);

    std::vector<Tensor<T>> skip_grads(depth);
    for (std::uint32_t s = depth; s-- > 0;) {
        const std::uint32_t stage = depth - 1 - s;  // encoder level this decoder stage mirrors
        const std::size_t first = decoder_first + 5 * s;
        Tensor<T> g_cat = block_backward(params, first + 1, fc.decoder[s], g, grads);
        auto [g_skip, g_up] = split_channels(g_cat, fc.encoder[stage].out.dim(0));
        skip_grads[stage] = std::move(g_skip);
        auto gu = upconv2_grad(fc.up_inputs[s], params.tensors[first], g_up);
        grads[first] = std::move(gu.weights);
        g = std::move(gu.input);
    }

    g = block_backward(params, bottleneck_first, fc.bottleneck, g, grads);
    for (std::uint32_t i = depth; i-- > 0;) {
        Tensor<T> g_out =
            maxpool2_grad(g, fc.pool_argmax[i], fc.encoder[i].out.shape());
        const auto& skip = skip_grads[i];
        for (std::size_t j = 0; j < g_out.size(); ++j) g_out[j] += skip[j];
        g = block_backward(params, 4 * i, fc.encoder[i], g_out, grads);
    }
    return {cce.loss, std::move(grads), std::move(fc.probabilities)};
}

template <typename T>
Mask argmax_mask(const Tensor<T>& probabilities) {
    require_chw(probabilities, "argmax_mask");
    const std::size_t k = probabilities.dim(0);
    Mask m(probabilities.dim(2), probabilities.dim(1));
    const std::size_t plane = m.area();
    for (std::size_t p = 0; p < plane; ++p) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
            if (probabilities[c * plane + p] > probabilities[best * plane + p]) best = c;
        }
        m.cells[p] = static_cast<std::uint8_t>(best);
    }
    return m;
}

template <typename T>
Mask predict_mask(const UNetParams<T>& params, const Tensor<T>& image) {
    return argmax_mask(forward(params, image));
}

template <typename T>
TrainResult<T> train(UNetParams<T> params, std::span<const LabeledTile> tiles,
                     const TrainHyper& hyper, const StepCallback& on_step) {
    if (tiles.empty()) throw std::invalid_argument("train: empty tile set");
    if (hyper.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
    for (const auto& tile : tiles) {
        check_input(params, tile.image.template cast<T>());
        for (auto id : tile.mask.cells) {
            if (id >= params.config.num_classes &&
                !(hyper.ignore_label && id == *hyper.ignore_label)) {
                throw std::invalid_argument("train: tile " + tile.origin.source_id +
                                            " has label " + std::to_string(id) +
                                            " but the network predicts " +
                                            std::to_string(params.config.num_classes) +
                                            " classes");
            }
        }
    }

    std::vector<Tensor<T>> images;
    images.reserve(tiles.size());
    for (const auto& tile : tiles) images.push_back(tile.image.template cast<T>());

    TrainResult<T> result{std::move(params), {}};
    auto& p = result.params;
    auto state = AdamState<T>::fresh(p.tensors, hyper.adam);
    std::mt19937_64 rng(hyper.shuffle_seed);
    std::vector<std::size_t> order(tiles.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates with a portable bounded draw.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng() % i]);
        }
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t stop = std::min(order.size(), start + hyper.batch_size);
            std::vector<Tensor<T>> batch_grads;
            double batch_loss = 0;
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                auto lg = loss_and_gradient(p, images[i], tiles[i].mask, hyper.ignore_label);
                batch_loss += static_cast<double>(lg.loss);
                if (batch_grads.empty()) {
                    batch_grads = std::move(lg.grads);
                } else {
                    for (std::size_t t = 0; t < batch_grads.size(); ++t) {
                        auto dst = batch_grads[t].values();
                        auto src = lg.grads[t].values();
                        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                    }
                }
            }
            const T scale = T{1} / static_cast<T>(stop - start);
            for (auto& g : batch_grads) {
                for (auto& v : g.values()) v *= scale;
            }
            adam_step<T>(p.tensors, batch_grads, state);
            const double mean_loss = batch_loss / static_cast<double>(stop - start);
            result.loss_history.push_back(mean_loss);
            if (on_step) on_step(result.loss_history.size(), mean_loss);
        }
    }
    return result;
}

template struct UNetParams<float>;
template struct UNetParams<double>;

#define SLZ_INSTANTIATE_UNET(T)                                                               \
    template UNetParams<T> build<T>(const UNetConfig&);                                       \
    template Tensor<T> forward(const UNetParams<T>&, const Tensor<T>&);                        \
    template LossAndGradient<T> loss_and_gradient(const UNetParams<T>&, const Tensor<T>&,      \
                                                  const Mask&, std::optional<std::uint8_t>);   \
    template Mask argmax_mask(const Tensor<T>&);                                               \
    template Mask predict_mask(const UNetParams<T>&, const Tensor<T>&);                        \
    template TrainResult<T> train(UNetParams<T>, std::span<const LabeledTile>,                 \
                                  const TrainHyper&, const StepCallback&);

SLZ_INSTANTIATE_UNET(float)
SLZ_INSTANTIATE_UNET(double)

}  // namespace slz
