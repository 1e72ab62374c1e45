#pragma once

#include <functional>

#include "ocular/layers.hpp"
#include "ocular/models.hpp"
#include "ocular/rng.hpp"
#include "ocular/tensor.hpp"

namespace ocular::testutil {

inline void fill_random(Tensor& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (double& v : t.data) v = uniform(rng, lo, hi);
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    fill_random(t, rng, lo, hi);
    return t;
}

// Central finite difference of f with respect to x.
inline double central_diff(const std::function<double()>& f, double& x, double h = 1e-5) {
    double orig = x;
    x = orig + h;
    double fp = f();
    x = orig - h;
    double fm = f();
    x = orig;
    return (fp - fm) / (2.0 * h);
}

// Relative error with an absolute floor so near-zero gradients compare on
// absolute terms.
inline double rel_err(double a, double b, double floor = 1e-7) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Checks analytic vs finite-difference gradients of scalar loss
// sum(projection * layer(x)) for the input and every parameter tensor.
// Returns the max relative error over all checked entries; checks at most
// max_probes entries per tensor.
double layer_gradient_max_rel_err(Layer& layer, Tensor input, Rng& rng, int max_probes = 64);

struct NetworkGradCheck {
    double worst_rel_err = 0.0;
    int checked = 0;
    int skipped = 0;  // stencil crossed a ReLU / pooling region boundary
};

// Finite-difference check of the full network's parameter gradients under
// the MSE dual loss. A ReLU network is piecewise linear, so a central
// stencil of width h is only a derivative estimate while the active region
// stays fixed; probes whose region signature changes at x ± h are counted
// as skipped instead of compared.
NetworkGradCheck network_gradient_check(Network& net, const Tensor& x, const Tensor& targets,
                                        Rng& rng, int probes_per_param = 4, double h = 1e-5);

}  // namespace ocular::testutil
