#include "gmsplit/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

namespace {
constexpr std::size_t kLiftedDim = 8;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

Dataset make_spiral_dataset(std::uint64_t seed, std::size_t n_per_class, int classes,
                            double noise_std) {
    if (classes < 2) throw ShapeError("spiral dataset needs at least 2 classes");
    if (n_per_class < 20) throw ShapeError("spiral dataset needs n_per_class >= 20");

    const std::size_t n = n_per_class * static_cast<std::size_t>(classes);

    // fixed 2 -> 8 embedding, its own derived stream
    Rng embed_rng(derive_seed(seed, "spiral-embedding"));
    double embed[2][kLiftedDim];
    for (auto& row : embed) {
        for (double& v : row) v = embed_rng.normal() / std::sqrt(2.0);
    }

    Rng noise_rng(derive_seed(seed, "spiral-noise"));
    Dataset data;
    data.seed = seed;
    data.num_classes = classes;
    data.inputs = Tensor({n, kLiftedDim});
    data.labels.resize(n);

    for (int c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(n_per_class - 1);
            const double radius = 0.15 + 0.85 * t;
            // 3.5 rad of sweep: arms interleave in angle but an 8-unit MLP
            // still separates them comfortably
            const double angle = kTwoPi * static_cast<double>(c) / classes + 3.5 * t;
            double p0 = radius * std::cos(angle);
            double p1 = radius * std::sin(angle);
            p0 += noise_std * noise_rng.normal();
            p1 += noise_std * noise_rng.normal();
            const std::size_t row = static_cast<std::size_t>(c) * n_per_class + i;
            for (std::size_t k = 0; k < kLiftedDim; ++k) {
                data.inputs.at(row, k) = p0 * embed[0][k] + p1 * embed[1][k];
            }
            data.labels[row] = c;
        }
    }

    // stratified 80/20 split
    Rng split_rng(derive_seed(seed, "spiral-split"));
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t> idx(n_per_class);
        for (std::size_t i = 0; i < n_per_class; ++i) {
            idx[i] = static_cast<std::size_t>(c) * n_per_class + i;
        }
        split_rng.shuffle(idx);
        const std::size_t n_train = (n_per_class * 8) / 10;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? data.train_idx : data.valid_idx).push_back(idx[i]);
        }
    }
    std::sort(data.train_idx.begin(), data.train_idx.end());
    std::sort(data.valid_idx.begin(), data.valid_idx.end());
    return data;
}

Batch gather_batch(const Dataset& data, const std::vector<std::size_t>& indices) {
    Batch b;
    b.x = Tensor({indices.size(), data.dim()});
    b.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* src = data.inputs.data() + indices[i] * data.dim();
        std::copy(src, src + data.dim(), b.x.data() + i * data.dim());
        b.labels[i] = data.labels[indices[i]];
    }
    return b;
}

std::vector<Batch> epoch_batches(const Dataset& data, const std::vector<std::size_t>& split,
                                 std::size_t batch_size, Rng& rng) {
    if (batch_size == 0 || batch_size > split.size()) {
        throw ShapeError("batch_size " + std::to_string(batch_size) + " invalid for split of " +
                         std::to_string(split.size()));
    }
    std::vector<std::size_t> order = split;
    rng.shuffle(order);
    const std::size_t n_batches = order.size() / batch_size;
    std::vector<Batch> out;
    out.reserve(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        std::vector<std::size_t> idx(order.begin() + b * batch_size,
                                     order.begin() + (b + 1) * batch_size);
        out.push_back(gather_batch(data, idx));
    }
    return out;
}

std::vector<Batch> sample_batches(const Dataset& data, const std::vector<std::size_t>& split,
                                  std::size_t count, std::size_t batch_size, Rng& rng) {
    if (batch_size == 0 || batch_size > split.size()) {
        throw ShapeError("batch_size " + std::to_string(batch_size) + " invalid for split of " +
                         std::to_string(split.size()));
    }
    std::vector<Batch> out;
    out.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        std::vector<std::size_t> pool = split;
        rng.shuffle(pool);
        pool.resize(batch_size);
        out.push_back(gather_batch(data, pool));
    }
    return out;
}

}  // namespace gmsplit
