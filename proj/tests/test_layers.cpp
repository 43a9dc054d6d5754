#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "slz/layers.hpp"
#include "support.hpp"

namespace slz {
namespace {

using testing::Rng;
using testing::random_tensor;

// Direct sliding-window convolution, written independently of the kernels.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b) {
    const long c = static_cast<long>(x.dim(0)), h = static_cast<long>(x.dim(1)),
               wd = static_cast<long>(x.dim(2));
    const long o = static_cast<long>(w.dim(0)), k = static_cast<long>(w.dim(2)), pad = k / 2;
    Tensor<double> out({w.dim(0), x.dim(1), x.dim(2)});
    for (long oc = 0; oc < o; ++oc) {
        for (long y = 0; y < h; ++y) {
            for (long xx = 0; xx < wd; ++xx) {
                double s = b[oc];
                for (long ic = 0; ic < c; ++ic) {
                    for (long ky = 0; ky < k; ++ky) {
                        for (long kx = 0; kx < k; ++kx) {
                            const long sy = y + ky - pad, sx = xx + kx - pad;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                            s += w[((oc * c + ic) * k + ky) * k + kx] * x[(ic * h + sy) * wd + sx];
                        }
                    }
                }
                out[(oc * h + y) * wd + xx] = s;
            }
        }
    }
    return out;
}

TEST(Conv2d, AllOnesThreeByThree) {
    const Tensor<double> x({1, 3, 3}, 1.0);
    const Tensor<double> w({1, 1, 3, 3}, 1.0);
    const Tensor<double> b({1}, 0.0);
    const auto y = conv2d(x, w, b);
    const std::vector<double> expected{4, 6, 4, 6, 9, 6, 4, 6, 4};
    ASSERT_EQ(y.shape(), (std::vector<std::size_t>{1, 3, 3}));
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_DOUBLE_EQ(y[i], expected[i]);
}

TEST(Conv2d, IdentityKernel) {
    Rng rng(3);
    const auto x = random_tensor({1, 5, 7}, rng);
    EXPECT_EQ(conv2d(x, Tensor<double>({1, 1, 1, 1}, 1.0), Tensor<double>({1}, 0.0)), x);
}

TEST(Conv2d, ZeroInputGivesBias) {
    Rng rng(4);
    const auto w = random_tensor({2, 3, 3, 3}, rng);
    const Tensor<double> b({2}, std::vector<double>{0.25, -1.5});
    const auto y = conv2d(Tensor<double>({3, 4, 4}, 0.0), w, b);
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_EQ(y[i], 0.25);
        EXPECT_EQ(y[16 + i], -1.5);
    }
}

TEST(Conv2d, MatchesSlidingWindowOracle) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t c = testing::uniform_index(rng, 1, 4), o = testing::uniform_index(rng, 1, 4);
        const std::size_t k = 2 * testing::uniform_index(rng, 0, 2) + 1;
        const auto x = random_tensor({c, testing::uniform_index(rng, 1, 9), testing::uniform_index(rng, 1, 9)}, rng);
        const auto w = random_tensor({o, c, k, k}, rng);
        const auto b = random_tensor({o}, rng);
        const auto got = conv2d(x, w, b);
        const auto want = naive_conv(x, w, b);
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    }
}

TEST(Conv2d, IsLinearWithZeroBias) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_tensor({3, 6, 5}, rng);
        const auto z = random_tensor({3, 6, 5}, rng);
        const auto w = random_tensor({2, 3, 3, 3}, rng);
        const Tensor<double> b({2}, 0.0);
        const double a = testing::uniform(rng, -2, 2), c = testing::uniform(rng, -2, 2);
        Tensor<double> mix(x.shape());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + c * z[i];
        const auto lhs = conv2d(mix, w, b);
        const auto cx = conv2d(x, w, b), cz = conv2d(z, w, b);
        for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], a * cx[i] + c * cz[i], 1e-10);
    }
}

TEST(Conv2d, RejectsChannelMismatchAndEvenKernels) {
    const Tensor<double> x({2, 4, 4});
    EXPECT_THROW(conv2d(x, Tensor<double>({1, 3, 3, 3}), Tensor<double>({1})), std::invalid_argument);
    EXPECT_THROW(conv2d(x, Tensor<double>({1, 2, 2, 2}), Tensor<double>({1})), std::invalid_argument);
    EXPECT_THROW(conv2d(x, Tensor<double>({1, 2, 3, 3}), Tensor<double>({2})), std::invalid_argument);
    EXPECT_THROW(conv2d_grad(x, Tensor<double>({1, 2, 3, 3}), Tensor<double>({1, 3, 4})),
                 std::invalid_argument);
}

TEST(Gradients, EveryLayerMatchesFiniteDifferences) {
    for (const auto& check : testing::layer_gradient_checks(11, 10)) {
        EXPECT_EQ(check.shapes, 10u) << check.layer;
        EXPECT_LT(check.worst, 1e-3) << check.layer;
    }
}

TEST(MaxPool, PicksWindowMaximumAndRoutesGradient) {
    const Tensor<double> x({1, 2, 4}, std::vector<double>{1, 5, 2, 2, 3, 4, 9, 0});
    const auto p = maxpool2(x);
    EXPECT_EQ(p.output[0], 5.0);
    EXPECT_EQ(p.output[1], 9.0);
    EXPECT_EQ(p.argmax[0], 1u);
    EXPECT_EQ(p.argmax[1], 6u);
    const auto g = maxpool2_grad(Tensor<double>({1, 1, 2}, std::vector<double>{7, 8}), p.argmax, x.shape());
    EXPECT_EQ(g, Tensor<double>({1, 2, 4}, std::vector<double>{0, 7, 0, 0, 0, 0, 8, 0}));
}

TEST(MaxPool, TiesGoToFirstRowMajorPositionDeterministically) {
    const Tensor<double> x({1, 2, 2}, 3.0);
    const auto a = maxpool2(x);
    const auto b = maxpool2(x);
    EXPECT_EQ(a.argmax, b.argmax);
    EXPECT_EQ(a.argmax[0], 0u);
    const Tensor<double> y({1, 2, 2}, std::vector<double>{1, 2, 2, 2});
    EXPECT_EQ(maxpool2(y).argmax[0], 1u);
}

TEST(MaxPool, RejectsOddSides) {
    EXPECT_THROW(maxpool2(Tensor<double>({1, 3, 4})), std::invalid_argument);
}

TEST(Upconv, ScattersEachInputIntoItsTwoByTwoBlock) {
    const Tensor<double> x({1, 1, 2}, std::vector<double>{1, 2});
    const Tensor<double> w({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
    const auto y = upconv2(x, w);
    EXPECT_EQ(y, Tensor<double>({1, 2, 4}, std::vector<double>{1, 2, 2, 4, 3, 4, 6, 8}));
    EXPECT_THROW(upconv2(x, Tensor<double>({2, 1, 2, 2})), std::invalid_argument);
}

TEST(Relu, ClampsNegativesAndHasZeroSubgradientAtZero) {
    const Tensor<double> x({1, 1, 3}, std::vector<double>{-1, 0, 2});
    EXPECT_EQ(relu(x), Tensor<double>({1, 1, 3}, std::vector<double>{0, 0, 2}));
    EXPECT_EQ(relu_grad(x, Tensor<double>({1, 1, 3}, 5.0)),
              Tensor<double>({1, 1, 3}, std::vector<double>{0, 0, 5}));
}

TEST(Concat, StacksThenSplits) {
    Rng rng(8);
    const auto a = random_tensor({2, 3, 3}, rng), b = random_tensor({1, 3, 3}, rng);
    const auto c = concat_channels(a, b);
    ASSERT_EQ(c.dim(0), 3u);
    const auto [ga, gb] = split_channels(c, 2);
    EXPECT_EQ(ga, a);
    EXPECT_EQ(gb, b);
    EXPECT_THROW(concat_channels(a, random_tensor({1, 2, 3}, rng)), std::invalid_argument);
}

TEST(Softmax, SumsToOneAndIgnoresPerPixelShift) {
    Rng rng(9);
    const auto logits = random_tensor({4, 5, 6}, rng, -20, 20);
    const auto p = softmax_pixels(logits);
    auto shifted = logits;
    for (std::size_t px = 0; px < 30; ++px) {
        const double s = testing::uniform(rng, -100, 100);
        for (std::size_t k = 0; k < 4; ++k) shifted[k * 30 + px] += s;
    }
    const auto q = softmax_pixels(shifted);
    for (std::size_t px = 0; px < 30; ++px) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            sum += p[k * 30 + px];
            EXPECT_NEAR(p[k * 30 + px], q[k * 30 + px], 1e-12);
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
    }
    EXPECT_TRUE(softmax_pixels(random_tensor({3, 2, 2}, rng, -800, 800)).all_finite());
    EXPECT_THROW(softmax_pixels(Tensor<double>({1, 2, 2})), std::invalid_argument);
}

TEST(Cce, ClampsConfidentWrongPredictions) {
    Tensor<double> p({2, 1, 1}, std::vector<double>{1.0, 0.0});
    Mask labels(1, 1, 1);
    const auto r = cce_loss(p, labels);
    EXPECT_NEAR(r.loss, -std::log(1e-12), 1e-9);
    EXPECT_TRUE(r.grad_logits.all_finite());
}

TEST(Cce, IgnoredPixelsCarryNoLossOrGradient) {
    Tensor<double> p({2, 1, 2}, std::vector<double>{0.25, 0.5, 0.75, 0.5});
    Mask labels(2, 1);
    labels.cells = {0, 1};
    const auto r = cce_loss(p, labels, std::uint8_t{1});
    EXPECT_EQ(r.counted_pixels, 1u);
    EXPECT_NEAR(r.loss, -std::log(0.25), 1e-12);
    EXPECT_EQ(r.grad_logits[1], 0.0);
    EXPECT_EQ(r.grad_logits[3], 0.0);
}

TEST(Cce, RejectsOutOfRangeLabelsAndSizeMismatch) {
    Tensor<double> p({2, 1, 1}, 0.5);
    EXPECT_THROW(cce_loss(p, Mask(1, 1, 2)), std::invalid_argument);
    EXPECT_THROW(cce_loss(p, Mask(2, 1, 0)), std::invalid_argument);
}

TEST(Conv2dGrad, MatchesFiniteDifferencesOnTwoChannelInput) {
    Rng rng(21);
    const auto x = random_tensor({2, 8, 8}, rng);
    const auto w = random_tensor({3, 2, 3, 3}, rng);
    const auto b = random_tensor({3}, rng);
    const auto r = random_tensor({3, 8, 8}, rng);
    const auto g = conv2d_grad(x, w, r);
    EXPECT_LT(testing::max_fd_error(x, g.input, [&](const Tensor<double>& v) {
                  return testing::dot(conv2d(v, w, b), r);
              }), 1e-4);
    EXPECT_LT(testing::max_fd_error(w, g.weights, [&](const Tensor<double>& v) {
                  return testing::dot(conv2d(x, v, b), r);
              }), 1e-4);
    EXPECT_LT(testing::max_fd_error(b, g.bias, [&](const Tensor<double>& v) {
                  return testing::dot(conv2d(x, w, v), r);
              }), 1e-4);
}

TEST(Conv2dGrad, BiasGradientIsPerChannelUpstreamSum) {
    Rng rng(22);
    const auto x = random_tensor({2, 5, 4}, rng);
    const auto w = random_tensor({3, 2, 3, 3}, rng);
    const auto up = random_tensor({3, 5, 4}, rng);
    const auto g = conv2d_grad(x, w, up);
    for (std::size_t o = 0; o < 3; ++o) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 20; ++i) sum += up[o * 20 + i];
        EXPECT_NEAR(g.bias[o], sum, 1e-12);
    }
}

TEST(Conv2dGrad, ZeroUpstreamGivesZeroGradients) {
    Rng rng(23);
    const auto x = random_tensor({2, 4, 4}, rng);
    const auto w = random_tensor({2, 2, 3, 3}, rng);
    const auto g = conv2d_grad(x, w, Tensor<double>({2, 4, 4}, 0.0));
    EXPECT_EQ(g.input, Tensor<double>(x.shape(), 0.0));
    EXPECT_EQ(g.weights, Tensor<double>(w.shape(), 0.0));
    EXPECT_EQ(g.bias, Tensor<double>({2}, 0.0));
}

TEST(MaxPool, SingleWindowTakesMaximum) {
    const auto p = maxpool2(Tensor<double>({1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(p.output[0], 4.0);
    EXPECT_EQ(p.argmax[0], 3u);
}

TEST(MaxPool, ConstantInputRoutesGradientToFirstWindowPosition) {
    const Tensor<double> x({1, 4, 4}, 2.5);
    const auto p = maxpool2(x);
    EXPECT_EQ(p.output, Tensor<double>({1, 2, 2}, 2.5));
    const auto g = maxpool2_grad(Tensor<double>({1, 2, 2}, 1.0), p.argmax, x.shape());
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t xx = 0; xx < 4; ++xx) {
            EXPECT_EQ(g.at(0, y, xx), (y % 2 == 0 && xx % 2 == 0) ? 1.0 : 0.0);
        }
    }
}

TEST(MaxPool, MatchesBruteForceWindowMaximum) {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_tensor({2, 4, 4}, rng);
        const auto p = maxpool2(x);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t oy = 0; oy < 2; ++oy) {
                for (std::size_t ox = 0; ox < 2; ++ox) {
                    double m = x.at(c, 2 * oy, 2 * ox);
                    for (std::size_t dy = 0; dy < 2; ++dy) {
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            m = std::max(m, x.at(c, 2 * oy + dy, 2 * ox + dx));
                        }
                    }
                    EXPECT_EQ(p.output.at(c, oy, ox), m);
                }
            }
        }
    }
}

TEST(Upconv, SinglePixelScalesKernel) {
    const Tensor<double> w({1, 1, 2, 2}, std::vector<double>{0.5, -1, 2, 3});
    const auto y = upconv2(Tensor<double>({1, 1, 1}, 4.0), w);
    EXPECT_EQ(y, Tensor<double>({1, 2, 2}, std::vector<double>{2, -4, 8, 12}));
}

TEST(Upconv, ZeroWeightsGiveZeroOutput) {
    Rng rng(25);
    const auto y = upconv2(random_tensor({3, 2, 3}, rng), Tensor<double>({3, 2, 2, 2}, 0.0));
    EXPECT_EQ(y, Tensor<double>({2, 4, 6}, 0.0));
}

TEST(Upconv, MatchesScatterAccumulateOracle) {
    Rng rng(26);
    const auto x = random_tensor({3, 3, 2}, rng);
    const auto w = random_tensor({3, 2, 2, 2}, rng);
    Tensor<double> want({2, 6, 4}, 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < 3; ++y)
            for (std::size_t xx = 0; xx < 2; ++xx)
                for (std::size_t o = 0; o < 2; ++o)
                    for (std::size_t ky = 0; ky < 2; ++ky)
                        for (std::size_t kx = 0; kx < 2; ++kx)
                            want.at(o, 2 * y + ky, 2 * xx + kx) +=
                                x.at(c, y, xx) * w[((c * 2 + o) * 2 + ky) * 2 + kx];
    const auto got = upconv2(x, w);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Concat, PreservesChannelOrder) {
    const Tensor<double> a({1, 2, 2}, 1.0);
    const Tensor<double> b({2, 2, 2}, std::vector<double>{2, 2, 2, 2, 3, 3, 3, 3});
    const auto c = concat_channels(a, b);
    EXPECT_EQ(c, Tensor<double>({3, 2, 2}, std::vector<double>{1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3}));
}

TEST(Softmax, ZeroLogitsAreUniform) {
    const auto p = softmax_pixels(Tensor<double>({5, 2, 2}, 0.0));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], 0.2);
}

TEST(Softmax, LargeLogitGapDoesNotOverflow) {
    const auto p = softmax_pixels(Tensor<double>({2, 1, 1}, std::vector<double>{1000, 0}));
    EXPECT_TRUE(p.all_finite());
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_LT(p[1], 1e-300);
}

TEST(Cce, PerfectPredictionHasZeroLoss) {
    Tensor<double> p({3, 1, 2}, std::vector<double>{1, 0, 0, 1, 0, 0});
    Mask labels(2, 1);
    labels.cells = {0, 1};
    EXPECT_NEAR(cce_loss(p, labels).loss, 0.0, 1e-12);
}

TEST(Cce, UniformPredictionGivesLogK) {
    const Tensor<double> p({5, 3, 3}, 0.2);
    Rng rng(27);
    EXPECT_NEAR(cce_loss(p, testing::random_mask(3, 3, 5, rng)).loss, std::log(5.0), 1e-12);
}

TEST(Cce, GradientMatchesFiniteDifferencesOnLogits) {
    Rng rng(28);
    const auto logits = random_tensor({4, 3, 5}, rng, -2, 2);
    const auto labels = testing::random_mask(5, 3, 4, rng);
    const auto r = cce_loss(softmax_pixels(logits), labels);
    EXPECT_LT(testing::max_fd_error(logits, r.grad_logits, [&](const Tensor<double>& v) {
                  return cce_loss(softmax_pixels(v), labels).loss;
              }), 1e-4);
}

TEST(Cce, AllPixelsIgnoredGivesZeroLossAndGradient) {
    const Tensor<double> p({2, 1, 2}, 0.5);
    const auto r = cce_loss(p, Mask(2, 1, 7), std::uint8_t{7});
    EXPECT_EQ(r.counted_pixels, 0u);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.grad_logits, Tensor<double>(p.shape(), 0.0));
}

}  // namespace
}  // namespace slz
