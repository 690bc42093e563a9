#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmsplit/supernet.hpp"

namespace gmsplit {

enum class Similarity { Cosine, PerFilterCosine, NegL2 };

const char* similarity_name(Similarity s);
std::optional<Similarity> similarity_from_name(const std::string& name);

// Gradient of the loss w.r.t. the shared weights, flattened in stable
// (edge, op, role) order with head last. Bundle boundaries are kept so the
// per-filter measure can score each bundle separately.
struct FlatGradient {
    std::vector<double> values;
    std::vector<std::size_t> bundle_offsets;  // start index of each bundle

    double norm() const;
};

struct GmConfig {
    std::size_t num_batches = 8;  // M
    std::size_t batch_size = 16;
    Similarity measure = Similarity::Cosine;
    // average per-batch gradients first, score once (default); the
    // mean-of-per-batch-scores variant is exposed for study only
    bool score_per_batch = false;
};

// Pairwise gradient-similarity matrix for one edge. Indices follow the
// sub-supernet's restricted op list for that edge.
struct GMMatrix {
    int edge = 0;
    std::vector<std::string> op_labels;
    std::vector<std::vector<double>> scores;
    Similarity measure = Similarity::Cosine;
    std::size_t num_batches = 0;

    std::size_t size() const { return op_labels.size(); }
    void validate() const;  // symmetry + measure-specific range invariants
    // total similarity over cross-group pairs
    double cut_cost(const std::vector<std::vector<int>>& groups) const;
};

// Balanced grouping of one edge's ops. `groups` holds positions into the
// edge's restricted op list, each group ascending, groups ordered by their
// smallest member.
struct SplitDecision {
    int edge = 0;
    std::vector<std::vector<int>> groups;
    std::optional<double> cut_cost;
    std::optional<GMMatrix> gm;
};

// Fix `edge` to the op at `pos` (one-hot) while every other edge mixes its
// allowed ops with equal weight, then average the shared-weight gradient over
// the given batches. Weight values are untouched; only scratch gradients are
// used. Throws DegenerateGradientError when the averaged gradient has zero
// norm.
FlatGradient collect_op_gradient(SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, int edge, int pos,
                                 const std::vector<Batch>& batches);

FlatGradient collect_op_gradient(SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, int edge, int pos,
                                 const Dataset& data, std::size_t num_batches,
                                 std::size_t batch_size, Rng& rng);

double gm_score(const FlatGradient& g1, const FlatGradient& g2, Similarity measure);

// Same batches reused for every op of the edge.
GMMatrix build_gm_matrix(SharedWeights& weights, const CellGraph& graph,
                         const Restriction& restriction, int edge,
                         const std::vector<Batch>& batches, Similarity measure);
GMMatrix build_gm_matrix(SharedWeights& weights, const CellGraph& graph,
                         const Restriction& restriction, int edge, const Dataset& data,
                         const GmConfig& cfg, Rng& rng);

// Brute-force enumeration of all balanced B-partitions; ties broken by the
// lexicographically smallest canonical group assignment.
SplitDecision balanced_min_cut(const GMMatrix& gm, int branching);

// One singleton group per op.
SplitDecision exhaustive_split(int edge, std::size_t num_ops,
                               const std::optional<GMMatrix>& gm = std::nullopt);
// Seeded balanced random grouping.
SplitDecision random_split(int edge, std::size_t num_ops, int branching, Rng& rng,
                           const std::optional<GMMatrix>& gm = std::nullopt);

struct EdgeScores {
    std::map<int, SplitDecision> per_edge;  // keyed by edge id, unsplit edges only
    int selected_edge = -1;                 // argmin cut cost, ties to lowest id
};

// argmin cut cost over the candidate decisions, ties to the lowest edge id;
// decisions without a cost lose to any decision that has one
int select_edge(const std::map<int, SplitDecision>& per_edge);

// Algorithm: per unsplit edge, build the GM matrix and its balanced min-cut;
// select the edge with the lowest cut cost.
EdgeScores score_edges(SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const std::vector<int>& unsplit_edges,
                       const Dataset& data, const GmConfig& cfg, int branching, Rng& rng);

}  // namespace gmsplit
