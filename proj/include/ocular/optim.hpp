#pragma once

#include <vector>

#include "ocular/tensor.hpp"

namespace ocular {

struct AdamConfig {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction. Moment tensors mirror the parameter shapes;
// the step counter is shared across all parameters.
class Adam {
  public:
    Adam() = default;
    Adam(AdamConfig cfg, const std::vector<Tensor*>& params);

    // One update: t is incremented first, then every parameter moves by
    // -alpha * m_hat / (sqrt(v_hat) + eps). Throws on non-finite gradients.
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads);

    const AdamConfig& config() const { return cfg_; }
    long long step_count() const { return t_; }
    std::vector<Tensor>& first_moments() { return m_; }
    std::vector<Tensor>& second_moments() { return v_; }
    void set_step_count(long long t) { t_ = t; }

  private:
    AdamConfig cfg_;
    std::vector<Tensor> m_, v_;
    long long t_ = 0;
};

struct DualLoss {
    double value;
    Tensor grad;  // (batch, 2)
};

// Mean squared error over both regression outputs: mean over batch x 2 of
// (pred - target)^2, with the matching analytic gradient.
DualLoss mse_dual_loss(const Tensor& pred, const Tensor& target);

}  // namespace ocular
