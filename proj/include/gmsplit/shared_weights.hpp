#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gmsplit/graph.hpp"
#include "gmsplit/param.hpp"

namespace gmsplit {

// The weight-sharing store of one (sub-)supernet: exactly one parameter
// bundle per parametric (edge, op) pair the restriction allows, one shared
// classifier head, and per-edge architecture logits for the differentiable
// search method. A store is owned by exactly one sub-supernet.
class SharedWeights {
public:
    SharedWeights() = default;

    // fresh seeded init; every bundle draws from its own derived stream so the
    // values of a bundle depend only on (seed, edge, op), not on which other
    // ops the restriction allows
    static SharedWeights init(const CellGraph& graph, const Restriction& restriction,
                              std::uint64_t seed);

    void reinit(const CellGraph& graph, const Restriction& restriction, std::uint64_t seed);

    std::uint64_t init_seed() const { return init_seed_; }

    ParamBundle* bundle(int edge, int op);
    const ParamBundle* bundle(int edge, int op) const;
    ParamBundle& head() { return head_; }
    const ParamBundle& head() const { return head_; }

    std::vector<std::vector<double>>& arch_params() { return arch_params_; }
    const std::vector<std::vector<double>>& arch_params() const { return arch_params_; }

    void zero_all_grads();
    void clear_momentum();

    // stable (edge, op, role) order, head last
    std::vector<Parameter*> all_params();
    std::vector<const Parameter*> all_params() const;
    // the shared weight w.r.t. a target edge: every parametric bundle on the
    // other edges plus the head, same stable order
    std::vector<const Parameter*> shared_params_excluding_edge(int edge) const;

    // deep copy holding only the child restriction's bundles; arch params on
    // each edge re-sliced to the surviving ops
    SharedWeights restricted_copy(const Restriction& parent_restriction,
                                  const Restriction& child_restriction) const;

    std::size_t num_edges() const { return edge_bundles_.size(); }

private:
    std::vector<std::map<int, ParamBundle>> edge_bundles_;
    ParamBundle head_;
    std::vector<std::vector<double>> arch_params_;
    std::uint64_t init_seed_ = 0;
};

}  // namespace gmsplit
