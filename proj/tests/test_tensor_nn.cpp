#include <cmath>

#include "doctest.h"
#include "ocular/layers.hpp"
#include "ocular/optim.hpp"
#include "test_util.hpp"

using namespace ocular;
using namespace ocular::testutil;

namespace {

// Independent nested-loop reference convolution with TF "same" padding.
Tensor reference_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    int N = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    int k = w.dim(0), OC = w.dim(3);
    int oh = (H + stride - 1) / stride, ow = (W + stride - 1) / stride;
    int pad_h = std::max((oh - 1) * stride + k - H, 0) / 2;
    int pad_w = std::max((ow - 1) * stride + k - W, 0) / 2;
    Tensor out({N, oh, ow, OC});
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int oc = 0; oc < OC; ++oc) {
                    double acc = b.data[oc];
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx)
                            for (int ic = 0; ic < IC; ++ic) {
                                int iy = oy * stride + ky - pad_h;
                                int ix = ox * stride + kx - pad_w;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += x.at4(n, iy, ix, ic) * w.at4(ky, kx, ic, oc);
                            }
                    out.at4(n, oy, ox, oc) = acc;
                }
    return out;
}

Tensor reference_depthwise(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    int k = w.dim(0);
    int oh = (H + stride - 1) / stride, ow = (W + stride - 1) / stride;
    int pad_h = std::max((oh - 1) * stride + k - H, 0) / 2;
    int pad_w = std::max((ow - 1) * stride + k - W, 0) / 2;
    Tensor out({N, oh, ow, C});
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int c = 0; c < C; ++c) {
                    double acc = b.data[c];
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            int iy = oy * stride + ky - pad_h;
                            int ix = ox * stride + kx - pad_w;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += x.at4(n, iy, ix, c) * w.data[(ky * k + kx) * C + c];
                        }
                    out.at4(n, oy, ox, c) = acc;
                }
    return out;
}

}  // namespace

TEST_CASE("conv2d identity kernel leaves a single-channel image unchanged") {
    Conv2D conv(1, 1, 3, 1);
    conv.weights.fill(0.0);
    conv.weights.at4(1, 1, 0, 0) = 1.0;
    conv.bias.fill(0.0);
    Rng rng(1);
    Tensor x = random_tensor({1, 7, 9, 1}, rng);
    Tensor y = conv.forward(x, Mode::Infer);
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]).epsilon(1e-15));
}

TEST_CASE("conv2d all-zero weights with bias emits constant bias") {
    Conv2D conv(2, 3, 3, 1);
    conv.weights.fill(0.0);
    conv.bias.data = {0.5, -1.0, 2.0};
    Rng rng(2);
    Tensor x = random_tensor({1, 4, 4, 2}, rng);
    Tensor y = conv.forward(x, Mode::Infer);
    for (int h = 0; h < 4; ++h)
        for (int w = 0; w < 4; ++w)
            for (int c = 0; c < 3; ++c) CHECK(y.at4(0, h, w, c) == conv.bias.data[c]);
}

TEST_CASE("conv2d matches the nested-loop reference") {
    Rng rng(3);
    Conv2D conv(2, 3, 3, 1);
    conv.init_he_uniform(rng);
    fill_random(conv.bias, rng);
    Tensor x = random_tensor({1, 5, 5, 2}, rng);
    Tensor want = reference_conv(x, conv.weights, conv.bias, 1);
    Tensor got = conv.forward(x, Mode::Infer);
    REQUIRE(got.shape == want.shape);
    for (std::int64_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got.data[i] - want.data[i]) < 1e-12);
}

TEST_CASE("conv2d rejects mismatched channel counts naming both shapes") {
    Conv2D conv(2, 3, 3, 1);
    Tensor x({1, 4, 4, 5});
    CHECK_THROWS_WITH_AS(conv.forward(x, Mode::Infer),
                         doctest::Contains("channels"), std::invalid_argument);
}

TEST_CASE("depthwise identity kernels pass input through") {
    DepthwiseConv2D dw(3, 3, 1);
    dw.weights.fill(0.0);
    for (int c = 0; c < 3; ++c) dw.weights.data[(1 * 3 + 1) * 3 + c] = 1.0;
    dw.bias.fill(0.0);
    Rng rng(4);
    Tensor x = random_tensor({2, 4, 5, 3}, rng);
    Tensor y = dw.forward(x, Mode::Infer);
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]).epsilon(1e-15));
}

TEST_CASE("depthwise channels are separable") {
    Rng rng(5);
    DepthwiseConv2D dw(3, 3, 1);
    dw.init_he_uniform(rng);
    Tensor x = random_tensor({1, 6, 6, 3}, rng);
    for (int h = 0; h < 6; ++h)
        for (int w = 0; w < 6; ++w) x.at4(0, h, w, 1) = 0.0;
    Tensor y = dw.forward(x, Mode::Infer);
    for (int h = 0; h < 6; ++h)
        for (int w = 0; w < 6; ++w) CHECK(y.at4(0, h, w, 1) == 0.0);
}

TEST_CASE("depthwise stride 2 matches the nested-loop reference") {
    Rng rng(6);
    DepthwiseConv2D dw(3, 3, 2);
    dw.init_he_uniform(rng);
    fill_random(dw.bias, rng);
    Tensor x = random_tensor({1, 6, 6, 3}, rng);
    Tensor want = reference_depthwise(x, dw.weights, dw.bias, 2);
    Tensor got = dw.forward(x, Mode::Infer);
    REQUIRE(got.shape == want.shape);
    for (std::int64_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got.data[i] - want.data[i]) < 1e-12);
}

TEST_CASE("conv2d is linear in its input with bias disabled") {
    Rng rng(7);
    Conv2D conv(2, 2, 3, 1, /*use_bias=*/false);
    conv.init_he_uniform(rng);
    Tensor x = random_tensor({1, 5, 5, 2}, rng);
    Tensor y = random_tensor({1, 5, 5, 2}, rng);
    double a = 0.7, b = -1.3;
    Tensor mix({1, 5, 5, 2});
    for (std::int64_t i = 0; i < mix.size(); ++i) mix.data[i] = a * x.data[i] + b * y.data[i];
    Tensor fx = conv.forward(x, Mode::Infer);
    Tensor fy = conv.forward(y, Mode::Infer);
    Tensor fmix = conv.forward(mix, Mode::Infer);
    for (std::int64_t i = 0; i < fmix.size(); ++i)
        CHECK(std::abs(fmix.data[i] - (a * fx.data[i] + b * fy.data[i])) < 1e-10);
}

TEST_CASE("batchnorm train mode normalizes per channel") {
    Rng rng(8);
    BatchNorm bn(3);
    Tensor x = random_tensor({4, 3, 3, 3}, rng, -2.0, 5.0);
    Tensor y = bn.forward(x, Mode::Train);
    // pre-affine stats: gamma=1, beta=0 by default
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        std::int64_t m = y.size() / 3;
        for (std::int64_t i = c; i < y.size(); i += 3) mean += y.data[i];
        mean /= static_cast<double>(m);
        for (std::int64_t i = c; i < y.size(); i += 3) var += (y.data[i] - mean) * (y.data[i] - mean);
        var /= static_cast<double>(m);
        CHECK(std::abs(mean) < 1e-6);
        CHECK(std::abs(var - 1.0) < 1e-2);  // epsilon = 1e-3 shrinks variance slightly
    }
}

TEST_CASE("batchnorm on a constant channel outputs beta") {
    BatchNorm bn(2);
    bn.beta.data = {0.25, -0.75};
    Tensor x({4, 2, 2, 2});
    x.fill(3.0);
    Tensor y = bn.forward(x, Mode::Train);
    // variance 0, epsilon floor: xhat = 0, output = beta exactly
    for (std::int64_t i = 0; i < y.size(); ++i)
        CHECK(y.data[i] == doctest::Approx(bn.beta.data[i % 2]).epsilon(1e-15));
}

TEST_CASE("batchnorm rejects batch of one in train mode") {
    BatchNorm bn(2);
    Tensor x({1, 2, 2, 2});
    CHECK_THROWS_AS(bn.forward(x, Mode::Train), std::invalid_argument);
}

TEST_CASE("batchnorm inference is a deterministic affine map") {
    Rng rng(9);
    BatchNorm bn(2);
    fill_random(bn.running_mean, rng);
    for (double& v : bn.running_var.data) v = uniform(rng, 0.5, 2.0);
    Tensor x = random_tensor({1, 2, 2, 2}, rng);
    Tensor y1 = bn.forward(x, Mode::Infer);
    Tensor y2 = bn.forward(x, Mode::Infer);
    CHECK(y1.data == y2.data);
}

TEST_CASE("relu, maxpool, global average pool basics") {
    ReLU relu;
    Tensor x({1, 2});
    x.data = {-1.0, 2.0};
    Tensor y = relu.forward(x, Mode::Infer);
    CHECK(y.data[0] == 0.0);
    CHECK(y.data[1] == 2.0);

    MaxPool2 pool;
    Tensor m({1, 2, 2, 1});
    m.data = {1, 2, 3, 4};
    Tensor p = pool.forward(m, Mode::Infer);
    CHECK(p.size() == 1);
    CHECK(p.data[0] == 4.0);

    GlobalAvgPool gap;
    Tensor g({1, 3, 4, 2});
    for (int h = 0; h < 3; ++h)
        for (int w = 0; w < 4; ++w) {
            g.at4(0, h, w, 0) = 7.5;
            g.at4(0, h, w, 1) = -2.0;
        }
    Tensor avg = gap.forward(g, Mode::Infer);
    CHECK(avg.at2(0, 0) == doctest::Approx(7.5));
    CHECK(avg.at2(0, 1) == doctest::Approx(-2.0));
}

TEST_CASE("maxpool output never exceeds the input max; pool of extent 1 passes through") {
    Rng rng(10);
    Tensor x = random_tensor({1, 5, 7, 2}, rng);
    double in_max = *std::max_element(x.data.begin(), x.data.end());
    MaxPool2 pool;
    Tensor y = pool.forward(x, Mode::Infer);
    CHECK(y.shape == std::vector<int>{1, 2, 3, 2});
    for (double v : y.data) CHECK(v <= in_max);

    Tensor thin = random_tensor({1, 1, 4, 2}, rng);
    Tensor ty = pool.forward(thin, Mode::Infer);
    CHECK(ty.shape == std::vector<int>{1, 1, 2, 2});
}

TEST_CASE("global average pool preserves the per-channel mean exactly") {
    Rng rng(11);
    Tensor x = random_tensor({2, 4, 6, 3}, rng);
    GlobalAvgPool gap;
    Tensor y = gap.forward(x, Mode::Infer);
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 3; ++c) {
            double mean = 0.0;
            for (int h = 0; h < 4; ++h)
                for (int w = 0; w < 6; ++w) mean += x.at4(n, h, w, c);
            mean /= 24.0;
            CHECK(y.at2(n, c) == doctest::Approx(mean).epsilon(1e-14));
        }
}

TEST_CASE("backward before forward is a state error") {
    Conv2D conv(1, 1, 3, 1);
    Tensor g({1, 2, 2, 1});
    CHECK_THROWS_AS(conv.backward(g), std::logic_error);
}

TEST_CASE("analytic gradients match central finite differences per layer") {
    Rng rng(12);
    double worst = 0.0;

    {
        Conv2D conv(2, 3, 3, 1);
        conv.init_he_uniform(rng);
        worst = std::max(worst, layer_gradient_max_rel_err(conv, random_tensor({2, 4, 5, 2}, rng), rng));
    }
    {
        Conv2D conv(2, 3, 3, 2);
        conv.init_he_uniform(rng);
        worst = std::max(worst, layer_gradient_max_rel_err(conv, random_tensor({2, 5, 5, 2}, rng), rng));
    }
    {
        Conv2D pw(3, 4, 1, 1);
        pw.init_he_uniform(rng);
        worst = std::max(worst, layer_gradient_max_rel_err(pw, random_tensor({2, 4, 4, 3}, rng), rng));
    }
    {
        DepthwiseConv2D dw(3, 3, 2);
        dw.init_he_uniform(rng);
        worst = std::max(worst, layer_gradient_max_rel_err(dw, random_tensor({2, 5, 6, 3}, rng), rng));
    }
    {
        BatchNorm bn(3);
        fill_random(bn.gamma, rng, 0.5, 1.5);
        fill_random(bn.beta, rng);
        worst = std::max(worst, layer_gradient_max_rel_err(bn, random_tensor({3, 3, 4, 3}, rng), rng));
    }
    {
        ReLU relu;
        worst = std::max(worst, layer_gradient_max_rel_err(relu, random_tensor({2, 4, 4, 2}, rng), rng));
    }
    {
        MaxPool2 pool;
        worst = std::max(worst, layer_gradient_max_rel_err(pool, random_tensor({2, 4, 6, 2}, rng), rng));
    }
    {
        GlobalAvgPool gap;
        worst = std::max(worst, layer_gradient_max_rel_err(gap, random_tensor({2, 3, 4, 2}, rng), rng));
    }
    {
        Dense fc(6, 4);
        fc.init_he_uniform(rng);
        worst = std::max(worst, layer_gradient_max_rel_err(fc, random_tensor({3, 6}, rng), rng));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("relu backward passes gradients through strictly positive inputs") {
    ReLU relu;
    Tensor x({1, 3});
    x.data = {1.0, 2.0, 0.5};
    relu.forward(x, Mode::Train);
    Tensor g({1, 3});
    g.data = {0.1, -0.2, 0.3};
    Tensor gi = relu.backward(g);
    CHECK(gi.data == g.data);
}

TEST_CASE("dense backward with zero output gradient leaves parameter grads zero") {
    Rng rng(13);
    Dense fc(4, 3);
    fc.init_he_uniform(rng);
    fc.zero_grads();
    fc.forward(random_tensor({2, 4}, rng), Mode::Train);
    Tensor zero({2, 3});
    fc.backward(zero);
    for (Tensor* g : fc.grads())
        for (double v : g->data) CHECK(v == 0.0);
}

TEST_CASE("mse dual loss values and gradient") {
    Tensor pred({1, 2}), target({1, 2});
    pred.data = {1.0, 0.0};
    target.data = {0.0, 0.0};
    DualLoss l = mse_dual_loss(pred, target);
    CHECK(l.value == doctest::Approx(0.5));

    DualLoss zero = mse_dual_loss(target, target);
    CHECK(zero.value == 0.0);
    for (double v : zero.grad.data) CHECK(v == 0.0);

    // random batch vs scalar loop oracle
    Rng rng(14);
    Tensor p({16, 2}), t({16, 2});
    testutil::fill_random(p, rng);
    testutil::fill_random(t, rng);
    double want = 0.0;
    for (std::int64_t i = 0; i < p.size(); ++i) want += (p.data[i] - t.data[i]) * (p.data[i] - t.data[i]);
    want /= 32.0;
    CHECK(std::abs(mse_dual_loss(p, t).value - want) < 1e-12);
}

TEST_CASE("adam: zero gradient leaves fresh parameters unchanged") {
    Tensor p({3});
    p.data = {1.0, -2.0, 0.5};
    Tensor g({3});
    Adam adam({}, {&p});
    Tensor before = p;
    adam.step({&p}, {&g});
    CHECK(p.data == before.data);
}

TEST_CASE("adam first step moves each element by about alpha") {
    Tensor p({2});
    p.data = {1.0, -1.0};
    Tensor g({2});
    g.data = {0.3, -4.0};
    AdamConfig cfg;
    Adam adam(cfg, {&p});
    adam.step({&p}, {&g});
    CHECK(std::abs((1.0 - p.data[0]) - cfg.alpha) < 1e-6);   // moved down by ~alpha
    CHECK(std::abs((p.data[1] + 1.0) - cfg.alpha) < 1e-6);   // moved up by ~alpha
}

TEST_CASE("adam trajectory matches a hand-rolled scalar oracle on f(x) = x^2") {
    Tensor p({1});
    p.data = {1.0};
    AdamConfig cfg;
    Adam adam(cfg, {&p});

    double x = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 3; ++t) {
        Tensor g({1});
        g.data = {2.0 * p.data[0]};
        adam.step({&p}, {&g});

        double go = 2.0 * x;
        m = cfg.beta1 * m + (1 - cfg.beta1) * go;
        v = cfg.beta2 * v + (1 - cfg.beta2) * go * go;
        double mh = m / (1 - std::pow(cfg.beta1, t));
        double vh = v / (1 - std::pow(cfg.beta2, t));
        x -= cfg.alpha * mh / (std::sqrt(vh) + cfg.epsilon);
        CHECK(std::abs(p.data[0] - x) < 1e-12);
    }
}

TEST_CASE("adam rejects non-finite gradients") {
    Tensor p({1});
    Tensor g({1});
    g.data = {std::numeric_limits<double>::quiet_NaN()};
    Adam adam({}, {&p});
    CHECK_THROWS_AS(adam.step({&p}, {&g}), std::runtime_error);
}

TEST_CASE("adam on a 2-parameter linear model decreases convex MSE monotonically") {
    // fit y = w x + b to a fixed batch
    Rng rng(15);
    std::vector<double> xs, ys;
    for (int i = 0; i < 8; ++i) {
        double x = uniform(rng, -1.0, 1.0);
        xs.push_back(x);
        ys.push_back(0.7 * x - 0.3);
    }
    Tensor w({1}), b({1});
    w.data = {0.0};
    b.data = {0.0};
    Adam adam({}, {&w, &b});
    auto loss_of = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double d = w.data[0] * xs[i] + b.data[0] - ys[i];
            acc += d * d;
        }
        return acc / xs.size();
    };
    double prev = loss_of();
    for (int step = 0; step < 200; ++step) {
        Tensor gw({1}), gb({1});
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double d = w.data[0] * xs[i] + b.data[0] - ys[i];
            gw.data[0] += 2.0 * d * xs[i] / xs.size();
            gb.data[0] += 2.0 * d / xs.size();
        }
        adam.step({&w, &b}, {&gw, &gb});
        double cur = loss_of();
        if (step >= 10) CHECK(cur < prev);
        prev = cur;
    }
}
