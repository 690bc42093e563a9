#pragma once

#include <vector>

#include "gmsplit/tensor.hpp"

namespace gmsplit {

struct LossResult {
    double loss = 0.0;
    Tensor logit_grad;  // (softmax - onehot) / B
};

// mean softmax cross-entropy over the batch
LossResult cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// argmax accuracy in [0, 1]
double accuracy(const Tensor& logits, const std::vector<int>& labels);

}  // namespace gmsplit
