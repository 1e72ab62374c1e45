#include "ocular/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ocular {

namespace {

void check_4d(const Tensor& x, const char* who) {
    if (x.ndim() != 4)
        throw std::invalid_argument(std::string(who) + ": expected 4-d input, got " + shape_str(x.shape));
}

// TF-style "same" padding bookkeeping.
struct SamePad {
    int out, pad_beg;
};

SamePad same_pad(int n, int k, int stride) {
    int out = (n + stride - 1) / stride;
    int pad_total = std::max((out - 1) * stride + k - n, 0);
    return {out, pad_total / 2};
}

double uniform_sym(Rng& rng, double limit) { return uniform(rng, -limit, limit); }

}  // namespace

// ---------------------------------------------------------------- Conv2D

Conv2D::Conv2D(int in_channels, int out_channels, int kernel, int stride, bool use_bias)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel), stride_(stride), use_bias_(use_bias) {
    if (in_c_ <= 0 || out_c_ <= 0) throw std::invalid_argument("conv2d: channel counts must be positive");
    if (stride_ != 1 && stride_ != 2) throw std::invalid_argument("conv2d: stride must be 1 or 2");
    weights = Tensor({k_, k_, in_c_, out_c_});
    bias = Tensor({out_c_});
    grad_w_ = Tensor({k_, k_, in_c_, out_c_});
    grad_b_ = Tensor({out_c_});
}

std::string Conv2D::name() const {
    return "conv" + std::to_string(k_) + "-" + std::to_string(out_c_) +
           (stride_ == 2 ? "-s2" : "");
}

std::vector<int> Conv2D::output_shape(const std::vector<int>& in) const {
    return {in[0], same_pad(in[1], k_, stride_).out, same_pad(in[2], k_, stride_).out, out_c_};
}

Tensor Conv2D::forward(const Tensor& x, Mode) {
    check_4d(x, "conv2d");
    if (x.dim(3) != in_c_)
        throw std::invalid_argument("conv2d: input has " + std::to_string(x.dim(3)) +
                                    " channels, weights expect " + std::to_string(in_c_) +
                                    " (input " + shape_str(x.shape) + ", weights " + shape_str(weights.shape) + ")");
    cached_in_ = x;
    forward_done_ = true;

    const int N = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto [oh, pad_h] = same_pad(H, k_, stride_);
    auto [ow, pad_w] = same_pad(W, k_, stride_);
    Tensor out({N, oh, ow, out_c_});

    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int oc = 0; oc < out_c_; ++oc) {
                    double acc = use_bias_ ? bias.data[oc] : 0.0;
                    for (int ky = 0; ky < k_; ++ky) {
                        int iy = oy * stride_ + ky - pad_h;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < k_; ++kx) {
                            int ix = ox * stride_ + kx - pad_w;
                            if (ix < 0 || ix >= W) continue;
                            for (int ic = 0; ic < in_c_; ++ic)
                                acc += x.at4(n, iy, ix, ic) * weights.at4(ky, kx, ic, oc);
                        }
                    }
                    out.at4(n, oy, ox, oc) = acc;
                }
    return out;
}

Tensor Conv2D::backward(const Tensor& grad_out) {
    require_forward("conv2d");
    const Tensor& x = cached_in_;
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto [oh, pad_h] = same_pad(H, k_, stride_);
    auto [ow, pad_w] = same_pad(W, k_, stride_);
    Tensor grad_in(x.shape);

    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int oc = 0; oc < out_c_; ++oc) {
                    double g = grad_out.at4(n, oy, ox, oc);
                    if (use_bias_) grad_b_.data[oc] += g;
                    for (int ky = 0; ky < k_; ++ky) {
                        int iy = oy * stride_ + ky - pad_h;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < k_; ++kx) {
                            int ix = ox * stride_ + kx - pad_w;
                            if (ix < 0 || ix >= W) continue;
                            for (int ic = 0; ic < in_c_; ++ic) {
                                grad_w_.at4(ky, kx, ic, oc) += x.at4(n, iy, ix, ic) * g;
                                grad_in.at4(n, iy, ix, ic) += weights.at4(ky, kx, ic, oc) * g;
                            }
                        }
                    }
                }
    return grad_in;
}

std::vector<Tensor*> Conv2D::params() {
    if (use_bias_) return {&weights, &bias};
    return {&weights};
}
std::vector<Tensor*> Conv2D::grads() {
    if (use_bias_) return {&grad_w_, &grad_b_};
    return {&grad_w_};
}

void Conv2D::init_he_uniform(Rng& rng) {
    double limit = std::sqrt(6.0 / (k_ * k_ * in_c_));
    for (double& w : weights.data) w = uniform_sym(rng, limit);
    bias.fill(0.0);
}

void Conv2D::init_glorot_uniform(Rng& rng) {
    double limit = std::sqrt(6.0 / (k_ * k_ * in_c_ + k_ * k_ * out_c_));
    for (double& w : weights.data) w = uniform_sym(rng, limit);
    bias.fill(0.0);
}

// ------------------------------------------------------- DepthwiseConv2D

DepthwiseConv2D::DepthwiseConv2D(int channels, int kernel, int stride, bool use_bias)
    : c_(channels), k_(kernel), stride_(stride), use_bias_(use_bias) {
    if (c_ <= 0) throw std::invalid_argument("depthwise: channel count must be positive");
    if (stride_ != 1 && stride_ != 2) throw std::invalid_argument("depthwise: stride must be 1 or 2");
    weights = Tensor({k_, k_, c_});
    bias = Tensor({c_});
    grad_w_ = Tensor({k_, k_, c_});
    grad_b_ = Tensor({c_});
}

std::string DepthwiseConv2D::name() const {
    return "dw-conv" + std::to_string(k_) + "-s" + std::to_string(stride_);
}

std::vector<int> DepthwiseConv2D::output_shape(const std::vector<int>& in) const {
    return {in[0], same_pad(in[1], k_, stride_).out, same_pad(in[2], k_, stride_).out, in[3]};
}

Tensor DepthwiseConv2D::forward(const Tensor& x, Mode) {
    check_4d(x, "depthwise");
    if (x.dim(3) != c_)
        throw std::invalid_argument("depthwise: kernel count " + std::to_string(c_) +
                                    " != input channels " + std::to_string(x.dim(3)));
    cached_in_ = x;
    forward_done_ = true;

    const int N = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto [oh, pad_h] = same_pad(H, k_, stride_);
    auto [ow, pad_w] = same_pad(W, k_, stride_);
    Tensor out({N, oh, ow, c_});

    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int c = 0; c < c_; ++c) {
                    double acc = use_bias_ ? bias.data[c] : 0.0;
                    for (int ky = 0; ky < k_; ++ky) {
                        int iy = oy * stride_ + ky - pad_h;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < k_; ++kx) {
                            int ix = ox * stride_ + kx - pad_w;
                            if (ix < 0 || ix >= W) continue;
                            acc += x.at4(n, iy, ix, c) * weights.data[(ky * k_ + kx) * c_ + c];
                        }
                    }
                    out.at4(n, oy, ox, c) = acc;
                }
    return out;
}

Tensor DepthwiseConv2D::backward(const Tensor& grad_out) {
    require_forward("depthwise");
    const Tensor& x = cached_in_;
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto [oh, pad_h] = same_pad(H, k_, stride_);
    auto [ow, pad_w] = same_pad(W, k_, stride_);
    Tensor grad_in(x.shape);

    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int c = 0; c < c_; ++c) {
                    double g = grad_out.at4(n, oy, ox, c);
                    if (use_bias_) grad_b_.data[c] += g;
                    for (int ky = 0; ky < k_; ++ky) {
                        int iy = oy * stride_ + ky - pad_h;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < k_; ++kx) {
                            int ix = ox * stride_ + kx - pad_w;
                            if (ix < 0 || ix >= W) continue;
                            grad_w_.data[(ky * k_ + kx) * c_ + c] += x.at4(n, iy, ix, c) * g;
                            grad_in.at4(n, iy, ix, c) += weights.data[(ky * k_ + kx) * c_ + c] * g;
                        }
                    }
                }
    return grad_in;
}

std::vector<Tensor*> DepthwiseConv2D::params() {
    if (use_bias_) return {&weights, &bias};
    return {&weights};
}
std::vector<Tensor*> DepthwiseConv2D::grads() {
    if (use_bias_) return {&grad_w_, &grad_b_};
    return {&grad_w_};
}

void DepthwiseConv2D::init_he_uniform(Rng& rng) {
    double limit = std::sqrt(6.0 / (k_ * k_));
    for (double& w : weights.data) w = uniform_sym(rng, limit);
    bias.fill(0.0);
}

// -------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int channels, double momentum, double epsilon)
    : c_(channels), momentum_(momentum), eps_(epsilon) {
    gamma = Tensor({c_});
    gamma.fill(1.0);
    beta = Tensor({c_});
    running_mean = Tensor({c_});
    running_var = Tensor({c_});
    running_var.fill(1.0);
    grad_gamma_ = Tensor({c_});
    grad_beta_ = Tensor({c_});
}

std::string BatchNorm::name() const { return "batchnorm"; }

std::vector<int> BatchNorm::output_shape(const std::vector<int>& in) const { return in; }

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
    if (x.dim(x.ndim() - 1) != c_)
        throw std::invalid_argument("batchnorm: channel mismatch " + shape_str(x.shape));
    const std::int64_t m = x.size() / c_;  // elements per channel
    if (mode == Mode::Train && x.dim(0) < 2)
        throw std::invalid_argument("batchnorm: training mode needs batch size >= 2");

    cached_mode_ = mode;
    cached_xhat_ = Tensor(x.shape);
    cached_inv_std_.assign(c_, 0.0);
    forward_done_ = true;

    Tensor out(x.shape);
    std::vector<double> mean(c_, 0.0), var(c_, 0.0);
    if (mode == Mode::Train) {
        for (std::int64_t i = 0; i < x.size(); ++i) mean[i % c_] += x.data[i];
        for (int c = 0; c < c_; ++c) mean[c] /= static_cast<double>(m);
        for (std::int64_t i = 0; i < x.size(); ++i) {
            double d = x.data[i] - mean[i % c_];
            var[i % c_] += d * d;
        }
        for (int c = 0; c < c_; ++c) var[c] /= static_cast<double>(m);
        for (int c = 0; c < c_; ++c) {
            running_mean.data[c] = momentum_ * running_mean.data[c] + (1.0 - momentum_) * mean[c];
            running_var.data[c] = momentum_ * running_var.data[c] + (1.0 - momentum_) * var[c];
        }
    } else {
        for (int c = 0; c < c_; ++c) {
            mean[c] = running_mean.data[c];
            var[c] = running_var.data[c];
        }
    }
    for (int c = 0; c < c_; ++c) cached_inv_std_[c] = 1.0 / std::sqrt(var[c] + eps_);
    for (std::int64_t i = 0; i < x.size(); ++i) {
        int c = static_cast<int>(i % c_);
        double xhat = (x.data[i] - mean[c]) * cached_inv_std_[c];
        cached_xhat_.data[i] = xhat;
        out.data[i] = gamma.data[c] * xhat + beta.data[c];
    }
    return out;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
    require_forward("batchnorm");
    const std::int64_t m = grad_out.size() / c_;
    Tensor grad_in(grad_out.shape);

    std::vector<double> sum_dy(c_, 0.0), sum_dy_xhat(c_, 0.0);
    for (std::int64_t i = 0; i < grad_out.size(); ++i) {
        int c = static_cast<int>(i % c_);
        sum_dy[c] += grad_out.data[i];
        sum_dy_xhat[c] += grad_out.data[i] * cached_xhat_.data[i];
    }
    for (int c = 0; c < c_; ++c) {
        grad_beta_.data[c] += sum_dy[c];
        grad_gamma_.data[c] += sum_dy_xhat[c];
    }
    if (cached_mode_ == Mode::Train) {
        double inv_m = 1.0 / static_cast<double>(m);
        for (std::int64_t i = 0; i < grad_out.size(); ++i) {
            int c = static_cast<int>(i % c_);
            grad_in.data[i] = gamma.data[c] * cached_inv_std_[c] *
                              (grad_out.data[i] - sum_dy[c] * inv_m -
                               cached_xhat_.data[i] * sum_dy_xhat[c] * inv_m);
        }
    } else {
        // running stats are constants in inference mode
        for (std::int64_t i = 0; i < grad_out.size(); ++i) {
            int c = static_cast<int>(i % c_);
            grad_in.data[i] = gamma.data[c] * cached_inv_std_[c] * grad_out.data[i];
        }
    }
    return grad_in;
}

std::vector<Tensor*> BatchNorm::params() { return {&gamma, &beta}; }
std::vector<Tensor*> BatchNorm::grads() { return {&grad_gamma_, &grad_beta_}; }

// ------------------------------------------------------------------ ReLU

Tensor ReLU::forward(const Tensor& x, Mode) {
    mask_.assign(x.data.size(), 0);
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (x.data[i] > 0.0) {
            out.data[i] = x.data[i];
            mask_[i] = 1;
        }
    }
    forward_done_ = true;
    return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    require_forward("relu");
    Tensor grad_in(grad_out.shape);
    for (std::size_t i = 0; i < grad_out.data.size(); ++i)
        grad_in.data[i] = mask_[i] ? grad_out.data[i] : 0.0;
    return grad_in;
}

std::uint64_t ReLU::region_signature() const {
    std::uint64_t h = 0x72656c75ULL;
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i]) h = mix64(h, static_cast<std::uint64_t>(i));
    return h;
}

// -------------------------------------------------------------- MaxPool2

std::vector<int> MaxPool2::output_shape(const std::vector<int>& in) const {
    return {in[0], std::max(1, in[1] / 2), std::max(1, in[2] / 2), in[3]};
}

Tensor MaxPool2::forward(const Tensor& x, Mode) {
    check_4d(x, "maxpool2");
    in_shape_ = x.shape;
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    const int oh = std::max(1, H / 2), ow = std::max(1, W / 2);
    Tensor out({N, oh, ow, C});
    argmax_.assign(out.data.size(), 0);
    forward_done_ = true;

    std::int64_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int c = 0; c < C; ++c, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::int64_t best_idx = 0;
                    for (int ky = 0; ky < 2; ++ky) {
                        int iy = 2 * oy + ky;
                        if (iy >= H) continue;
                        for (int kx = 0; kx < 2; ++kx) {
                            int ix = 2 * ox + kx;
                            if (ix >= W) continue;
                            double v = x.at4(n, iy, ix, c);
                            if (v > best) {
                                best = v;
                                best_idx = ((static_cast<std::int64_t>(n) * H + iy) * W + ix) * C + c;
                            }
                        }
                    }
                    out.data[oi] = best;
                    argmax_[oi] = best_idx;
                }
    return out;
}

Tensor MaxPool2::backward(const Tensor& grad_out) {
    require_forward("maxpool2");
    Tensor grad_in(in_shape_);
    for (std::size_t i = 0; i < grad_out.data.size(); ++i)
        grad_in.data[argmax_[i]] += grad_out.data[i];
    return grad_in;
}

std::uint64_t MaxPool2::region_signature() const {
    std::uint64_t h = 0x706f6f6cULL;
    for (std::int64_t idx : argmax_) h = mix64(h, static_cast<std::uint64_t>(idx));
    return h;
}

// --------------------------------------------------------- GlobalAvgPool

std::vector<int> GlobalAvgPool::output_shape(const std::vector<int>& in) const {
    return {in[0], in[3]};
}

Tensor GlobalAvgPool::forward(const Tensor& x, Mode) {
    check_4d(x, "global_avg_pool");
    in_shape_ = x.shape;
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    Tensor out({N, C});
    for (int n = 0; n < N; ++n)
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                for (int c = 0; c < C; ++c) out.at2(n, c) += x.at4(n, h, w, c);
    for (double& v : out.data) v /= static_cast<double>(H) * W;
    forward_done_ = true;
    return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
    require_forward("global_avg_pool");
    const int N = in_shape_[0], H = in_shape_[1], W = in_shape_[2], C = in_shape_[3];
    Tensor grad_in(in_shape_);
    double inv = 1.0 / (static_cast<double>(H) * W);
    for (int n = 0; n < N; ++n)
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                for (int c = 0; c < C; ++c) grad_in.at4(n, h, w, c) = grad_out.at2(n, c) * inv;
    return grad_in;
}

// ----------------------------------------------------------------- Flatten

std::vector<int> Flatten::output_shape(const std::vector<int>& in) const {
    int f = 1;
    for (std::size_t i = 1; i < in.size(); ++i) f *= in[i];
    return {in[0], f};
}

Tensor Flatten::forward(const Tensor& x, Mode) {
    in_shape_ = x.shape;
    Tensor out = x;
    out.shape = output_shape(x.shape);
    forward_done_ = true;
    return out;
}

Tensor Flatten::backward(const Tensor& grad_out) {
    require_forward("flatten");
    Tensor grad_in = grad_out;
    grad_in.shape = in_shape_;
    return grad_in;
}

// ------------------------------------------------------------------- Dense

Dense::Dense(int in_features, int units, bool use_bias)
    : in_f_(in_features), units_(units), use_bias_(use_bias) {
    if (in_f_ <= 0 || units_ <= 0) throw std::invalid_argument("dense: sizes must be positive");
    weights = Tensor({in_f_, units_});
    bias = Tensor({units_});
    grad_w_ = Tensor({in_f_, units_});
    grad_b_ = Tensor({units_});
}

std::string Dense::name() const { return "fc-" + std::to_string(units_); }

std::vector<int> Dense::output_shape(const std::vector<int>& in) const {
    return {in[0], units_};
}

Tensor Dense::forward(const Tensor& x, Mode) {
    if (x.ndim() != 2 || x.dim(1) != in_f_)
        throw std::invalid_argument("dense: expected (N, " + std::to_string(in_f_) + "), got " +
                                    shape_str(x.shape));
    cached_in_ = x;
    forward_done_ = true;
    const int N = x.dim(0);
    Tensor out({N, units_});
    for (int n = 0; n < N; ++n)
        for (int u = 0; u < units_; ++u) {
            double acc = use_bias_ ? bias.data[u] : 0.0;
            for (int f = 0; f < in_f_; ++f) acc += x.at2(n, f) * weights.at2(f, u);
            out.at2(n, u) = acc;
        }
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    require_forward("dense");
    const Tensor& x = cached_in_;
    const int N = x.dim(0);
    Tensor grad_in(x.shape);
    for (int n = 0; n < N; ++n)
        for (int u = 0; u < units_; ++u) {
            double g = grad_out.at2(n, u);
            if (use_bias_) grad_b_.data[u] += g;
            for (int f = 0; f < in_f_; ++f) {
                grad_w_.at2(f, u) += x.at2(n, f) * g;
                grad_in.at2(n, f) += weights.at2(f, u) * g;
            }
        }
    return grad_in;
}

std::vector<Tensor*> Dense::params() {
    if (use_bias_) return {&weights, &bias};
    return {&weights};
}
std::vector<Tensor*> Dense::grads() {
    if (use_bias_) return {&grad_w_, &grad_b_};
    return {&grad_w_};
}

void Dense::init_he_uniform(Rng& rng) {
    double limit = std::sqrt(6.0 / in_f_);
    for (double& w : weights.data) w = uniform(rng, -limit, limit);
    bias.fill(0.0);
}

void Dense::init_glorot_uniform(Rng& rng) {
    double limit = std::sqrt(6.0 / (in_f_ + units_));
    for (double& w : weights.data) w = uniform(rng, -limit, limit);
    bias.fill(0.0);
}

}  // namespace ocular
