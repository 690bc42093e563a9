#include "gmsplit/shared_weights.hpp"

#include <algorithm>
#include <cmath>

#include "gmsplit/rng.hpp"

namespace gmsplit {

namespace {

ParamBundle make_linear_bundle(int edge, int op, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    ParamBundle b;
    Tensor w({dim, dim});
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    b.params.emplace_back(ParamId{edge, op, "weight"}, std::move(w));
    b.params.emplace_back(ParamId{edge, op, "bias"}, Tensor({dim}));
    return b;
}

ParamBundle make_head_bundle(std::size_t dim, int classes, std::uint64_t seed) {
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    ParamBundle b;
    Tensor w({dim, static_cast<std::size_t>(classes)});
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    b.params.emplace_back(ParamId{ParamId::kHeadEdge, 0, "weight"}, std::move(w));
    b.params.emplace_back(ParamId{ParamId::kHeadEdge, 0, "bias"},
                          Tensor({static_cast<std::size_t>(classes)}));
    return b;
}

}  // namespace

SharedWeights SharedWeights::init(const CellGraph& graph, const Restriction& restriction,
                                  std::uint64_t seed) {
    SharedWeights w;
    w.reinit(graph, restriction, seed);
    return w;
}

void SharedWeights::reinit(const CellGraph& graph, const Restriction& restriction,
                           std::uint64_t seed) {
    restriction.validate(graph);
    init_seed_ = seed;
    edge_bundles_.assign(graph.num_edges(), {});
    arch_params_.assign(graph.num_edges(), {});
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        for (int o : restriction.allowed[e]) {
            if (op_is_parametric(graph.edges[e].ops[o])) {
                const std::uint64_t bundle_seed =
                    derive_seed(seed, "bundle.e" + std::to_string(e) + ".o" + std::to_string(o));
                edge_bundles_[e].emplace(o, make_linear_bundle(static_cast<int>(e), o,
                                                               graph.feature_dim, bundle_seed));
            }
        }
        arch_params_[e].assign(restriction.allowed[e].size(), 0.0);
    }
    head_ = make_head_bundle(graph.feature_dim, graph.num_classes, derive_seed(seed, "head"));
}

ParamBundle* SharedWeights::bundle(int edge, int op) {
    auto& per_edge = edge_bundles_.at(static_cast<std::size_t>(edge));
    auto it = per_edge.find(op);
    return it == per_edge.end() ? nullptr : &it->second;
}

const ParamBundle* SharedWeights::bundle(int edge, int op) const {
    const auto& per_edge = edge_bundles_.at(static_cast<std::size_t>(edge));
    auto it = per_edge.find(op);
    return it == per_edge.end() ? nullptr : &it->second;
}

void SharedWeights::zero_all_grads() {
    for (auto& per_edge : edge_bundles_) {
        for (auto& [op, b] : per_edge) b.zero_grad();
    }
    head_.zero_grad();
}

void SharedWeights::clear_momentum() {
    auto clear = [](ParamBundle& b) {
        for (auto& p : b.params) p.momentum.fill(0.0);
    };
    for (auto& per_edge : edge_bundles_) {
        for (auto& [op, b] : per_edge) clear(b);
    }
    clear(head_);
}

std::vector<Parameter*> SharedWeights::all_params() {
    std::vector<Parameter*> out;
    for (auto& per_edge : edge_bundles_) {
        for (auto& [op, b] : per_edge) {
            for (auto& p : b.params) out.push_back(&p);
        }
    }
    for (auto& p : head_.params) out.push_back(&p);
    return out;
}

std::vector<const Parameter*> SharedWeights::all_params() const {
    std::vector<const Parameter*> out;
    for (const auto& per_edge : edge_bundles_) {
        for (const auto& [op, b] : per_edge) {
            for (const auto& p : b.params) out.push_back(&p);
        }
    }
    for (const auto& p : head_.params) out.push_back(&p);
    return out;
}

std::vector<const Parameter*> SharedWeights::shared_params_excluding_edge(int edge) const {
    std::vector<const Parameter*> out;
    for (std::size_t e = 0; e < edge_bundles_.size(); ++e) {
        if (static_cast<int>(e) == edge) continue;
        for (const auto& [op, b] : edge_bundles_[e]) {
            for (const auto& p : b.params) out.push_back(&p);
        }
    }
    for (const auto& p : head_.params) out.push_back(&p);
    return out;
}

SharedWeights SharedWeights::restricted_copy(const Restriction& parent_restriction,
                                             const Restriction& child_restriction) const {
    SharedWeights child;
    child.init_seed_ = init_seed_;
    child.edge_bundles_.resize(edge_bundles_.size());
    child.arch_params_.resize(arch_params_.size());
    for (std::size_t e = 0; e < edge_bundles_.size(); ++e) {
        for (int o : child_restriction.allowed[e]) {
            if (const ParamBundle* b = bundle(static_cast<int>(e), o)) {
                child.edge_bundles_[e].emplace(o, *b);
            }
        }
        // arch logits follow their op into the child
        const auto& parent_allowed = parent_restriction.allowed[e];
        for (int o : child_restriction.allowed[e]) {
            const auto it = std::lower_bound(parent_allowed.begin(), parent_allowed.end(), o);
            if (it == parent_allowed.end() || *it != o) {
                throw ConfigError("child restriction op " + std::to_string(o) +
                                  " missing from parent on edge " + std::to_string(e));
            }
            const std::size_t pos = static_cast<std::size_t>(it - parent_allowed.begin());
            child.arch_params_[e].push_back(arch_params_[e].at(pos));
        }
    }
    child.head_ = head_;
    return child;
}

}  // namespace gmsplit
