#include "gmsplit/loss.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

LossResult cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t batch = logits.rows();
    const std::size_t classes = logits.cols();
    if (classes < 2) {
        throw ShapeError("cross_entropy requires at least two classes, got " +
                         std::to_string(classes));
    }
    if (labels.size() != batch) {
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(batch));
    }
    LossResult out;
    out.logit_grad = Tensor(logits.shape());
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int label = labels[b];
        if (label < 0 || static_cast<std::size_t>(label) >= classes) {
            throw ShapeError("cross_entropy: label " + std::to_string(label) + " out of range");
        }
        const double* row = logits.data() + b * classes;
        const double mx = *std::max_element(row, row + classes);
        double denom = 0.0;
        for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - mx);
        const double log_denom = std::log(denom);
        total += -(row[label] - mx - log_denom);
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - mx) / denom;
            out.logit_grad.at(b, c) =
                (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / static_cast<double>(batch);
        }
    }
    out.loss = total / static_cast<double>(batch);
    return out;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t batch = logits.rows();
    if (batch == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = logits.data() + b * logits.cols();
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        if (static_cast<std::size_t>(labels[b]) == best) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(batch);
}

}  // namespace gmsplit
