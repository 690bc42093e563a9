#pragma once

#include <cstdint>
#include <vector>

#include "gmsplit/rng.hpp"
#include "gmsplit/tensor.hpp"

namespace gmsplit {

struct Dataset {
    Tensor inputs;            // N x d
    std::vector<int> labels;  // N class indices
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> valid_idx;
    std::uint64_t seed = 0;
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return inputs.cols(); }
};

struct Batch {
    Tensor x;
    std::vector<int> labels;
};

// Multi-arm spiral in 2-D lifted to d=8 through a seeded random linear
// embedding. 80/20 train/valid split, stratified per class. Pure function of
// its arguments.
Dataset make_spiral_dataset(std::uint64_t seed, std::size_t n_per_class, int classes,
                            double noise_std);

Batch gather_batch(const Dataset& data, const std::vector<std::size_t>& indices);

// One epoch worth of minibatches: the split shuffled by `rng`, cut into
// floor(N / batch_size) full batches (remainder dropped).
std::vector<Batch> epoch_batches(const Dataset& data, const std::vector<std::size_t>& split,
                                 std::size_t batch_size, Rng& rng);

// M batches sampled independently of epoch structure; used by gradient
// collection so every op sees the identical batch sequence.
std::vector<Batch> sample_batches(const Dataset& data, const std::vector<std::size_t>& split,
                                  std::size_t count, std::size_t batch_size, Rng& rng);

}  // namespace gmsplit
