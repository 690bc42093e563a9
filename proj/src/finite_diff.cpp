#include "gmsplit/finite_diff.hpp"

#include <cmath>

namespace gmsplit {

std::vector<Tensor> finite_diff_grad(const std::function<double()>& loss_fn,
                                     std::vector<Parameter*> params, double h) {
    if (h <= 0.0) throw ShapeError("finite_diff_grad requires h > 0");
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (Parameter* p : params) {
        Tensor g(p->value.shape());
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double plus = loss_fn();
            p->value[i] = orig - h;
            const double minus = loss_fn();
            p->value[i] = orig;
            g[i] = (plus - minus) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double grad_rel_err(double analytic, double estimate) {
    const double denom = std::max({std::fabs(analytic), std::fabs(estimate), 1e-3});
    return std::fabs(analytic - estimate) / denom;
}

}  // namespace gmsplit
