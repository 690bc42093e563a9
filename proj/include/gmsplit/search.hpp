#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmsplit/gm.hpp"
#include "gmsplit/optim.hpp"
#include "gmsplit/supernet.hpp"

namespace gmsplit {

enum class SearchMethod { Rsps, Darts1 };

const char* search_method_name(SearchMethod m);
std::optional<SearchMethod> search_method_from_name(const std::string& name);

struct SearchConfig {
    SearchMethod method = SearchMethod::Rsps;
    std::size_t epochs = 30;
    OptimizerConfig optimizer;
    double arch_lr = 0.05;  // darts1 only
    std::uint64_t seed = 0;
    std::size_t warm_epo = 5;
    std::size_t num_splits = 0;         // T
    std::vector<int> branch_factors;    // B_t, one per split
    std::size_t gm_batches = 8;         // M
    Similarity similarity = Similarity::Cosine;

    void validate(const CellGraph& graph) const;
};

struct EpochStats {
    double train_loss = 0.0;
    double valid_loss = 0.0;
    double valid_acc = 0.0;
};

struct TrainedSupernet {
    std::string label;
    std::vector<EpochStats> epoch_log;  // one entry per epoch trained
    double final_train_loss = 0.0;
    double final_valid_loss = 0.0;
    double final_valid_acc = 0.0;
};

// Uniform-path sampling: one random child per minibatch, step only the
// parameters that child touches.
TrainedSupernet rsps_train(SharedWeights& weights, const CellGraph& graph,
                           const Restriction& restriction, const Dataset& data,
                           std::size_t epochs, const OptimizerConfig& optimizer,
                           std::uint64_t seed);

// One epoch of the same loop; the learning-rate schedule spans
// `horizon_epochs`. Lets successive halving grow a candidate's training
// epoch-by-epoch along the exact trajectory rsps_train would take. Returns
// the mean minibatch loss of the epoch.
double rsps_train_one_epoch(SharedWeights& weights, const CellGraph& graph,
                            const Restriction& restriction, const Dataset& data,
                            std::size_t epoch, std::size_t horizon_epochs,
                            const OptimizerConfig& optimizer, std::uint64_t seed);

// First-order differentiable search: alternate an arch-logit step on a valid
// batch with a weight step on a train batch, both through the softmax
// mixture.
TrainedSupernet darts1_train(SharedWeights& weights, const CellGraph& graph,
                             const Restriction& restriction, const Dataset& data,
                             std::size_t epochs, const OptimizerConfig& optimizer, double arch_lr,
                             std::uint64_t seed);

// darts1: per-edge argmax of arch logits (ties to the lowest op index).
// rsps: evaluate enumerated children on the valid split with the shared
// weights and keep the best (ties to the lexicographically first arch). When
// the sub-supernet holds more than `eval_cap` children, a seeded uniform
// subsample of that size is scored instead.
Architecture derive_architecture(const SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, SearchMethod method,
                                 const Dataset& data, std::size_t eval_cap = 256,
                                 std::uint64_t seed = 0);

// One child trained with nothing shared: a singleton restriction around the
// architecture, fresh seeded store, rsps loop (which then always samples this
// child).
struct StandaloneResult {
    TrainedSupernet log;
    SharedWeights weights;
    Restriction restriction;
};
StandaloneResult train_standalone(const CellGraph& graph, const Architecture& arch,
                                  const Dataset& data, std::size_t epochs,
                                  const OptimizerConfig& optimizer, std::uint64_t seed);

Restriction singleton_restriction(const CellGraph& graph, const Architecture& arch);

}  // namespace gmsplit
