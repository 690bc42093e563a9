#pragma once

#include <functional>
#include <vector>

#include "gmsplit/param.hpp"

namespace gmsplit {

// Central-difference gradient estimate for an arbitrary scalar loss over a set
// of parameters. The oracle against which every analytic gradient is checked.
// `loss_fn` is re-evaluated with perturbed values; parameters are restored
// afterwards.
std::vector<Tensor> finite_diff_grad(const std::function<double()>& loss_fn,
                                     std::vector<Parameter*> params, double h = 1e-5);

// Guarded relative error for gradient comparisons: |a-b| / max(|a|, |b|, 1e-3).
// The floor keeps finite-difference roundoff on near-zero coordinates from
// registering as large relative error.
double grad_rel_err(double analytic, double estimate);

}  // namespace gmsplit
