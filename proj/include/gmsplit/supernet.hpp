#pragma once

#include <vector>

#include "gmsplit/dataset.hpp"
#include "gmsplit/graph.hpp"
#include "gmsplit/loss.hpp"
#include "gmsplit/shared_weights.hpp"

namespace gmsplit {

// Per-edge mixing coefficients over the restriction's allowed ops. One-hot
// rows recover a plain child model; softmax rows give the differentiable
// mixture; uniform rows give the mean network used during gradient
// collection.
using EdgeWeights = std::vector<std::vector<double>>;

EdgeWeights one_hot_weights(const Restriction& restriction, const Architecture& arch);
EdgeWeights uniform_weights(const Restriction& restriction);
// softmax of the store's arch logits, per edge
EdgeWeights softmax_weights(const std::vector<std::vector<double>>& arch_params);

// Cartesian product of allowed ops, deterministic lexicographic order (edge 0
// most significant, op indices ascending).
std::vector<Architecture> enumerate_children(const CellGraph& graph,
                                             const Restriction& restriction);

Architecture sample_uniform_arch(const CellGraph& graph, const Restriction& restriction, Rng& rng);

struct CellTrace {
    std::vector<Tensor> node_values;
    // op_outputs[e][pos]: output of allowed op `pos` on edge e; empty Tensor
    // when the op was skipped (zero mixing weight, not requested)
    std::vector<std::vector<Tensor>> op_outputs;
    Tensor logits;
};

// Node value = sum of incoming edge outputs; edge output = weighted sum of op
// outputs. `keep_all_ops` forces evaluation of zero-weight ops (needed for
// mixture-coefficient gradients).
CellTrace cell_forward(const SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const EdgeWeights& edge_weights,
                       const Tensor& x, bool keep_all_ops = false);

// Zeroes every gradient in the store, runs one reverse pass and fills the
// gradients of all parameters with nonzero mixing weight (plus the head).
// When `mixture_grads` is non-null it receives dL/d(edge_weights) and all op
// outputs are evaluated. Returns the batch loss.
double cell_backward(SharedWeights& weights, const CellGraph& graph,
                     const Restriction& restriction, const EdgeWeights& edge_weights,
                     const Batch& batch, EdgeWeights* mixture_grads = nullptr);

Tensor forward_child(const SharedWeights& weights, const CellGraph& graph,
                     const Architecture& arch, const Tensor& x);
double backward_child(SharedWeights& weights, const CellGraph& graph, const Architecture& arch,
                      const Batch& batch);

// forward under softmax(arch_params) restricted to the allowed ops
Tensor mixture_forward(const SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const Tensor& x);

struct EvalResult {
    double loss = 0.0;
    double acc = 0.0;
};

EvalResult evaluate_child(const SharedWeights& weights, const CellGraph& graph,
                          const Architecture& arch, const Dataset& data,
                          const std::vector<std::size_t>& split);
EvalResult evaluate_mixture(const SharedWeights& weights, const CellGraph& graph,
                            const Restriction& restriction, const Dataset& data,
                            const std::vector<std::size_t>& split);

}  // namespace gmsplit
