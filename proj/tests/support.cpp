#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slz/layers.hpp"

namespace slz::testing {

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo, double hi) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.values()) v = uniform(rng, lo, hi);
    return t;
}

Tensor<double> away_from_zero(std::vector<std::size_t> shape, Rng& rng, double margin) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.values()) {
        const double mag = uniform(rng, margin, 1.0);
        v = (rng() & 1) ? mag : -mag;
    }
    return t;
}

Tensor<double> distinct_values(std::vector<std::size_t> shape, Rng& rng, double gap) {
    Tensor<double> t(std::move(shape));
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<double>(order[i]) * gap - 0.5;
    }
    return t;
}

Mask random_mask(std::size_t w, std::size_t h, std::size_t classes, Rng& rng) {
    Mask m(w, h);
    for (auto& c : m.cells) c = static_cast<std::uint8_t>(uniform_index(rng, 0, classes - 1));
    return m;
}

Mask blob_mask(std::size_t w, std::size_t h, std::size_t classes, Rng& rng) {
    Mask m(w, h, static_cast<std::uint8_t>(uniform_index(rng, 0, classes - 1)));
    const std::size_t blobs = uniform_index(rng, 2, 4);
    for (std::size_t b = 0; b < blobs; ++b) {
        const auto cls = static_cast<std::uint8_t>(uniform_index(rng, 0, classes - 1));
        const double cx = uniform(rng, 0.2, 0.8) * static_cast<double>(w);
        const double cy = uniform(rng, 0.2, 0.8) * static_cast<double>(h);
        const double r = uniform(rng, 0.15, 0.35) * static_cast<double>(std::min(w, h));
        const bool disk = rng() & 1;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) + 0.5 - cx;
                const double dy = static_cast<double>(y) + 0.5 - cy;
                const bool inside = disk ? dx * dx + dy * dy <= r * r
                                         : std::abs(dx) <= r && std::abs(dy) <= r;
                if (inside) m.at(x, y) = cls;
            }
        }
    }
    return m;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

double max_fd_error(const Tensor<double>& x, const Tensor<double>& analytic,
                    const std::function<double(const Tensor<double>&)>& loss, double h) {
    Tensor<double> probe = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = loss(probe);
        probe[i] = x[i] - h;
        const double down = loss(probe);
        probe[i] = x[i];
        worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
    }
    return worst;
}

std::vector<LayerCheck> layer_gradient_checks(std::uint64_t seed, std::size_t shapes) {
    Rng rng(seed);
    LayerCheck conv{"conv2d", 0, 0}, pool{"maxpool2", 0, 0}, up{"upconv2", 0, 0},
        act{"relu", 0, 0}, cat{"concat_channels", 0, 0}, loss{"softmax+cce", 0, 0};
    const auto track = [](LayerCheck& c, double err) { c.worst = std::max(c.worst, err); };

    for (std::size_t s = 0; s < shapes; ++s) {
        {
            const std::size_t c = uniform_index(rng, 1, 3), o = uniform_index(rng, 1, 3);
            const std::size_t k = 2 * uniform_index(rng, 0, 2) + 1;
            const std::size_t h = uniform_index(rng, 2, 6), w = uniform_index(rng, 2, 6);
            const auto x = random_tensor({c, h, w}, rng);
            const auto wt = random_tensor({o, c, k, k}, rng);
            const auto b = random_tensor({o}, rng);
            const auto r = random_tensor({o, h, w}, rng);
            const auto g = conv2d_grad(x, wt, r);
            track(conv, max_fd_error(x, g.input, [&](const Tensor<double>& v) {
                      return dot(conv2d(v, wt, b), r);
                  }));
            track(conv, max_fd_error(wt, g.weights, [&](const Tensor<double>& v) {
                      return dot(conv2d(x, v, b), r);
                  }));
            track(conv, max_fd_error(b, g.bias, [&](const Tensor<double>& v) {
                      return dot(conv2d(x, wt, v), r);
                  }));
            ++conv.shapes;
        }
        {
            const std::size_t c = uniform_index(rng, 1, 3);
            const std::size_t h = 2 * uniform_index(rng, 1, 3), w = 2 * uniform_index(rng, 1, 3);
            const auto x = distinct_values({c, h, w}, rng);
            const auto r = random_tensor({c, h / 2, w / 2}, rng);
            const auto p = maxpool2(x);
            const auto g = maxpool2_grad(r, p.argmax, x.shape());
            track(pool, max_fd_error(x, g, [&](const Tensor<double>& v) {
                      return dot(maxpool2(v).output, r);
                  }));
            ++pool.shapes;
        }
        {
            const std::size_t c = uniform_index(rng, 1, 3), o = uniform_index(rng, 1, 3);
            const std::size_t h = uniform_index(rng, 1, 4), w = uniform_index(rng, 1, 4);
            const auto x = random_tensor({c, h, w}, rng);
            const auto wt = random_tensor({c, o, 2, 2}, rng);
            const auto r = random_tensor({o, 2 * h, 2 * w}, rng);
            const auto g = upconv2_grad(x, wt, r);
            track(up, max_fd_error(x, g.input, [&](const Tensor<double>& v) {
                      return dot(upconv2(v, wt), r);
                  }));
            track(up, max_fd_error(wt, g.weights, [&](const Tensor<double>& v) {
                      return dot(upconv2(x, v), r);
                  }));
            ++up.shapes;
        }
        {
            const std::size_t c = uniform_index(rng, 1, 3);
            const std::size_t h = uniform_index(rng, 1, 5), w = uniform_index(rng, 1, 5);
            const auto x = away_from_zero({c, h, w}, rng);
            const auto r = random_tensor({c, h, w}, rng);
            track(act, max_fd_error(x, relu_grad(x, r), [&](const Tensor<double>& v) {
                      return dot(relu(v), r);
                  }));
            ++act.shapes;
        }
        {
            const std::size_t ca = uniform_index(rng, 1, 3), cb = uniform_index(rng, 1, 3);
            const std::size_t h = uniform_index(rng, 1, 4), w = uniform_index(rng, 1, 4);
            const auto a = random_tensor({ca, h, w}, rng);
            const auto b = random_tensor({cb, h, w}, rng);
            const auto r = random_tensor({ca + cb, h, w}, rng);
            const auto [ga, gb] = split_channels(r, ca);
            track(cat, max_fd_error(a, ga, [&](const Tensor<double>& v) {
                      return dot(concat_channels(v, b), r);
                  }));
            track(cat, max_fd_error(b, gb, [&](const Tensor<double>& v) {
                      return dot(concat_channels(a, v), r);
                  }));
            ++cat.shapes;
        }
        {
            const std::size_t k = uniform_index(rng, 2, 5);
            const std::size_t h = uniform_index(rng, 1, 4), w = uniform_index(rng, 1, 4);
            const auto logits = random_tensor({k, h, w}, rng, -3.0, 3.0);
            const Mask labels = random_mask(w, h, k, rng);
            std::optional<std::uint8_t> ignore;
            if (s % 2 == 1) ignore = static_cast<std::uint8_t>(uniform_index(rng, 0, k - 1));
            const auto res = cce_loss(softmax_pixels(logits), labels, ignore);
            if (res.counted_pixels > 0) {
                track(loss, max_fd_error(logits, res.grad_logits, [&](const Tensor<double>& v) {
                          return cce_loss(softmax_pixels(v), labels, ignore).loss;
                      }));
            }
            ++loss.shapes;
        }
    }
    return {conv, pool, up, act, cat, loss};
}

SpotCheck unet_spot_check(std::uint64_t seed, std::size_t count, double h) {
    Rng rng(seed);
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 4;
    cfg.num_classes = 3;
    cfg.seed = seed;
    auto params = build<double>(cfg);
    // Nonzero biases so every parameter, biases included, carries signal.
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
        if (params.tensors[t].rank() == 1) {
            for (auto& v : params.tensors[t].values()) v = uniform(rng, -0.1, 0.1);
        }
    }
    const auto image = random_tensor({3, 8, 8}, rng, 0.0, 1.0);
    const Mask labels = random_mask(8, 8, cfg.num_classes, rng);
    const auto analytic = loss_and_gradient(params, image, labels);

    std::vector<std::pair<std::size_t, std::size_t>> flat;
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
        for (std::size_t i = 0; i < params.tensors[t].size(); ++i) flat.emplace_back(t, i);
    }
    std::shuffle(flat.begin(), flat.end(), rng);

    SpotCheck result;
    const auto loss_at = [&](std::size_t t, std::size_t i, double value) {
        auto probe = params;
        probe.tensors[t][i] = value;
        return static_cast<double>(loss_and_gradient(probe, image, labels).loss);
    };
    for (const auto& [t, i] : flat) {
        if (result.checked == count) break;
        const double x = params.tensors[t][i];
        const double f0 = static_cast<double>(analytic.loss);
        const double fp = loss_at(t, i, x + h);
        const double fm = loss_at(t, i, x - h);
        const double forward_slope = (fp - f0) / h;
        const double backward_slope = (f0 - fm) / h;
        const double a = analytic.grads[t][i];
        // A switch inside [-h, h] shows up as one-sided slopes that disagree
        // far beyond the smooth curvature term.
        if (relative_error(forward_slope, backward_slope) > 0.25 &&
            std::abs(forward_slope - backward_slope) > 1e-4) {
            ++result.skipped_kinks;
            continue;
        }
        result.worst = std::max(result.worst, relative_error(a, (fp - fm) / (2.0 * h)));
        ++result.checked;
    }
    return result;
}

std::vector<std::vector<std::uint64_t>> oracle_confusion(const Mask& pred, const Mask& truth,
                                                         std::size_t classes) {
    std::vector<std::vector<std::uint64_t>> cm(classes, std::vector<std::uint64_t>(classes, 0));
    for (std::size_t y = 0; y < truth.height; ++y) {
        for (std::size_t x = 0; x < truth.width; ++x) {
            cm[truth.cells[y * truth.width + x]][pred.cells[y * pred.width + x]] += 1;
        }
    }
    return cm;
}

OracleIou oracle_iou(const Mask& pred, const Mask& truth, std::size_t classes) {
    OracleIou r;
    r.tp.assign(classes, 0);
    r.fp.assign(classes, 0);
    r.fn.assign(classes, 0);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < truth.cells.size(); ++i) {
            const bool in_pred = pred.cells[i] == c;
            const bool in_truth = truth.cells[i] == c;
            if (in_pred && in_truth) ++r.tp[c];
            if (in_pred && !in_truth) ++r.fp[c];
            if (!in_pred && in_truth) ++r.fn[c];
        }
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const auto uni = r.tp[c] + r.fp[c] + r.fn[c];
        if (uni == 0) {
            r.per_class.emplace_back();
            continue;
        }
        r.per_class.emplace_back(static_cast<double>(r.tp[c]) / static_cast<double>(uni));
        sum += *r.per_class.back();
        ++n;
    }
    r.mean = n ? sum / static_cast<double>(n) : 0.0;
    return r;
}

OracleFpr oracle_fpr(const std::vector<bool>& pred_safe, const std::vector<bool>& truth_safe) {
    OracleFpr r;
    for (std::size_t i = 0; i < truth_safe.size(); ++i) {
        if (!truth_safe[i] && pred_safe[i]) ++r.fp;
        if (!truth_safe[i] && !pred_safe[i]) ++r.tn;
    }
    r.value = (r.fp + r.tn) ? static_cast<double>(r.fp) / static_cast<double>(r.fp + r.tn) : 0.0;
    return r;
}

OracleSquare oracle_square(const std::vector<std::vector<bool>>& safe) {
    OracleSquare best;
    const std::size_t h = safe.size();
    const std::size_t w = h ? safe[0].size() : 0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t s = 1; y + s <= h && x + s <= w; ++s) {
                bool all = true;
                for (std::size_t yy = y; yy < y + s && all; ++yy) {
                    for (std::size_t xx = x; xx < x + s && all; ++xx) all = safe[yy][xx];
                }
                if (!all) break;
                // Row-major scan: the first square found at a new size is topmost-leftmost.
                if (s > best.side) best = {s, x, y};
            }
        }
    }
    return best;
}

}  // namespace slz::testing
