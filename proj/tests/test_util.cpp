#include "test_util.hpp"

#include <algorithm>

namespace ocular::testutil {

double layer_gradient_max_rel_err(Layer& layer, Tensor input, Rng& rng, int max_probes) {
    Tensor out = layer.forward(input, Mode::Train);
    Tensor projection = random_tensor(out.shape, rng);

    auto loss = [&]() {
        Tensor y = layer.forward(input, Mode::Train);
        double acc = 0.0;
        for (std::int64_t i = 0; i < y.size(); ++i) acc += y.data[i] * projection.data[i];
        return acc;
    };

    layer.zero_grads();
    layer.forward(input, Mode::Train);
    Tensor grad_in = layer.backward(projection);
    auto params = layer.params();
    auto grads = layer.grads();

    double worst = 0.0;
    auto probe_tensor = [&](Tensor& values, const Tensor& analytic) {
        std::vector<std::int64_t> idx(values.size());
        for (std::int64_t i = 0; i < values.size(); ++i) idx[i] = i;
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
        std::int64_t n = std::min<std::int64_t>(max_probes, values.size());
        for (std::int64_t i = 0; i < n; ++i) {
            double numeric = central_diff(loss, values.data[idx[i]]);
            worst = std::max(worst, rel_err(analytic.data[idx[i]], numeric));
        }
    };

    probe_tensor(input, grad_in);
    for (std::size_t p = 0; p < params.size(); ++p) probe_tensor(*params[p], *grads[p]);
    return worst;
}

NetworkGradCheck network_gradient_check(Network& net, const Tensor& x, const Tensor& targets,
                                        Rng& rng, int probes_per_param, double h) {
    auto loss_value = [&]() {
        Tensor pred = net.forward(x, Mode::Train);
        return mse_dual_loss(pred, targets).value;
    };

    Tensor pred = net.forward(x, Mode::Train);
    std::uint64_t base_sig = net.region_signature();
    DualLoss loss = mse_dual_loss(pred, targets);
    net.zero_grads();
    net.backward(loss.grad);

    auto params = net.params();
    auto grads = net.grads();

    NetworkGradCheck result;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (int probe = 0; probe < probes_per_param; ++probe) {
            std::int64_t j = static_cast<std::int64_t>(uniform_index(rng, params[p]->size()));
            double& w = params[p]->data[j];
            double orig = w;

            w = orig + h;
            double fp = loss_value();
            std::uint64_t sig_p = net.region_signature();
            w = orig - h;
            double fm = loss_value();
            std::uint64_t sig_m = net.region_signature();
            w = orig;

            if (sig_p != base_sig || sig_m != base_sig) {
                ++result.skipped;
                continue;
            }
            double numeric = (fp - fm) / (2.0 * h);
            // loss evaluations carry ~1e-8 of rounding noise through the
            // stencil, so gradients below ~1e-3 are compared absolutely
            result.worst_rel_err =
                std::max(result.worst_rel_err, rel_err(grads[p]->data[j], numeric, 1e-3));
            ++result.checked;
        }
    }
    return result;
}

}  // namespace ocular::testutil
