#include "ocular/optim.hpp"

#include <cmath>

namespace ocular {

Adam::Adam(AdamConfig cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
        m_.emplace_back(p->shape);
        v_.emplace_back(p->shape);
    }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw std::invalid_argument("adam: parameter/state count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g) || !p.same_shape(m_[i]))
            throw std::invalid_argument("adam: shape mismatch at parameter " + std::to_string(i));
        require_finite(g, "adam gradient");
        for (std::int64_t j = 0; j < p.size(); ++j) {
            double gj = g.data[j];
            m_[i].data[j] = cfg_.beta1 * m_[i].data[j] + (1.0 - cfg_.beta1) * gj;
            v_[i].data[j] = cfg_.beta2 * v_[i].data[j] + (1.0 - cfg_.beta2) * gj * gj;
            double mhat = m_[i].data[j] / bc1;
            double vhat = v_[i].data[j] / bc2;
            p.data[j] -= cfg_.alpha * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

DualLoss mse_dual_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target) || pred.ndim() != 2 || pred.dim(1) != 2)
        throw std::invalid_argument("mse_dual_loss: expected matching (N, 2) shapes, got " +
                                    shape_str(pred.shape) + " vs " + shape_str(target.shape));
    const std::int64_t n = pred.size();
    DualLoss out{0.0, Tensor(pred.shape)};
    for (std::int64_t i = 0; i < n; ++i) {
        double d = pred.data[i] - target.data[i];
        out.value += d * d;
        out.grad.data[i] = 2.0 * d / static_cast<double>(n);
    }
    out.value /= static_cast<double>(n);
    return out;
}

}  // namespace ocular
