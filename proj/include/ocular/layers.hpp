#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ocular/rng.hpp"
#include "ocular/tensor.hpp"

namespace ocular {

enum class Mode { Train, Infer };

// One layer of the network. forward() caches whatever backward() needs;
// backward() returns the gradient with respect to the layer input and
// accumulates parameter gradients (call zero_grads() between steps).
class Layer {
  public:
    virtual ~Layer() = default;
    virtual std::string name() const = 0;
    virtual Tensor forward(const Tensor& x, Mode mode) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
    // Hash of the piecewise-linear region selected by the last forward pass
    // (ReLU masks, pooling argmaxes). A finite-difference stencil is only a
    // valid derivative estimate while this stays constant; smooth layers
    // return 0.
    virtual std::uint64_t region_signature() const { return 0; }
    void zero_grads() {
        for (Tensor* g : grads()) g->fill(0.0);
    }

  protected:
    bool forward_done_ = false;
    void require_forward(const char* who) const {
        if (!forward_done_) throw std::logic_error(std::string(who) + ": backward before forward");
    }
};

// 3x3 (or 1x1) convolution with TF-style "same" zero padding.
// Output spatial extent is ceil(n / stride).
class Conv2D : public Layer {
  public:
    Conv2D(int in_channels, int out_channels, int kernel, int stride, bool use_bias = true);

    std::string name() const override;
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    void init_he_uniform(Rng& rng);
    void init_glorot_uniform(Rng& rng);

    Tensor weights;  // (kh, kw, in_c, out_c)
    Tensor bias;     // (out_c)

  private:
    int in_c_, out_c_, k_, stride_;
    bool use_bias_;
    Tensor grad_w_, grad_b_, cached_in_;
};

// Per-channel 3x3 spatial convolution, "same" padding; channel c of the
// output depends only on channel c of the input.
class DepthwiseConv2D : public Layer {
  public:
    DepthwiseConv2D(int channels, int kernel, int stride, bool use_bias = true);

    std::string name() const override;
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    void init_he_uniform(Rng& rng);

    Tensor weights;  // (kh, kw, c)
    Tensor bias;     // (c)

  private:
    int c_, k_, stride_;
    bool use_bias_;
    Tensor grad_w_, grad_b_, cached_in_;
};

// Batch normalization over the channel axis. Training mode normalizes with
// batch statistics (population variance over N*H*W) and updates running
// stats by exponential moving average; inference mode uses running stats.
class BatchNorm : public Layer {
  public:
    explicit BatchNorm(int channels, double momentum = 0.99, double epsilon = 1e-3);

    std::string name() const override;
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    Tensor gamma, beta;
    Tensor running_mean, running_var;  // not learnable

  private:
    int c_;
    double momentum_, eps_;
    Tensor grad_gamma_, grad_beta_;
    Tensor cached_xhat_;
    std::vector<double> cached_inv_std_;
    Mode cached_mode_ = Mode::Train;
};

class ReLU : public Layer {
  public:
    std::string name() const override { return "relu"; }
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
    std::uint64_t region_signature() const override;

  private:
    std::vector<char> mask_;
};

// 2x2 max pooling, stride 2. Odd spatial extents drop the trailing
// row/column (output floor(n/2)); an extent of 1 passes through so that
// deep pooling ladders stay valid at small desk-scale inputs.
class MaxPool2 : public Layer {
  public:
    std::string name() const override { return "maxpool2"; }
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    std::uint64_t region_signature() const override;

  private:
    std::vector<int> in_shape_;
    std::vector<std::int64_t> argmax_;
};

class GlobalAvgPool : public Layer {
  public:
    std::string name() const override { return "global_avg_pool"; }
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

  private:
    std::vector<int> in_shape_;
};

class Flatten : public Layer {
  public:
    std::string name() const override { return "flatten"; }
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

  private:
    std::vector<int> in_shape_;
};

// Fully connected layer, linear activation (pair with ReLU when needed).
class Dense : public Layer {
  public:
    Dense(int in_features, int units, bool use_bias = true);

    std::string name() const override;
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override;
    std::vector<Tensor*> grads() override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    void init_he_uniform(Rng& rng);
    void init_glorot_uniform(Rng& rng);

    Tensor weights;  // (in_features, units)
    Tensor bias;     // (units)

  private:
    int in_f_, units_;
    bool use_bias_;
    Tensor grad_w_, grad_b_, cached_in_;
};

}  // namespace ocular
