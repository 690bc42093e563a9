#include "gmsplit/partition.hpp"

#include <algorithm>

#include "gmsplit/parallel.hpp"

namespace gmsplit {

bool PartitionSet::has_edge(int edge) const {
    return std::any_of(entries.begin(), entries.end(),
                       [edge](const PartitionEntry& e) { return e.edge == edge; });
}

Restriction PartitionSet::to_restriction(const CellGraph& graph) const {
    Restriction r = Restriction::full(graph);
    for (const PartitionEntry& entry : entries) {
        r.allowed.at(static_cast<std::size_t>(entry.edge)) = entry.ops;
    }
    r.validate(graph);
    return r;
}

std::vector<int> PartitionSet::unsplit_edges(const CellGraph& graph) const {
    std::vector<int> out;
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        if (!has_edge(static_cast<int>(e))) out.push_back(static_cast<int>(e));
    }
    return out;
}

void PartitionSet::validate(const CellGraph& graph) const {
    std::vector<int> seen;
    for (const PartitionEntry& entry : entries) {
        if (std::find(seen.begin(), seen.end(), entry.edge) != seen.end()) {
            throw ConfigError("partition set lists edge " + std::to_string(entry.edge) + " twice");
        }
        seen.push_back(entry.edge);
        if (entry.ops.empty()) {
            throw ConfigError("partition entry for edge " + std::to_string(entry.edge) + " is empty");
        }
    }
    to_restriction(graph);
}

const char* split_schema_name(SplitSchema s) {
    switch (s) {
        case SplitSchema::Gm: return "gm";
        case SplitSchema::Exhaustive: return "exhaustive";
        case SplitSchema::Random: return "random";
    }
    return "?";
}

std::optional<SplitSchema> split_schema_from_name(const std::string& name) {
    if (name == "gm") return SplitSchema::Gm;
    if (name == "exhaustive") return SplitSchema::Exhaustive;
    if (name == "random") return SplitSchema::Random;
    return std::nullopt;
}

std::vector<SubSupernet> instantiate_children(const SubSupernet& parent, const CellGraph& graph,
                                              const SplitDecision& decision) {
    if (parent.partition.has_edge(decision.edge)) {
        throw ConfigError("edge " + std::to_string(decision.edge) + " already split in " +
                          parent.label);
    }
    const auto& parent_allowed = parent.restriction.allowed.at(static_cast<std::size_t>(decision.edge));
    std::vector<bool> covered(parent_allowed.size(), false);
    for (const auto& group : decision.groups) {
        for (int pos : group) {
            if (pos < 0 || static_cast<std::size_t>(pos) >= parent_allowed.size() ||
                covered[static_cast<std::size_t>(pos)]) {
                throw ConfigError("split decision inconsistent with parent restriction on edge " +
                                  std::to_string(decision.edge));
            }
            covered[static_cast<std::size_t>(pos)] = true;
        }
    }
    if (!std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
        throw ConfigError("split decision does not cover every op on edge " +
                          std::to_string(decision.edge));
    }

    std::vector<SubSupernet> children;
    children.reserve(decision.groups.size());
    for (std::size_t b = 0; b < decision.groups.size(); ++b) {
        SubSupernet child;
        child.label = parent.label + "/" + std::to_string(b);
        child.parent_label = parent.label;
        child.partition = parent.partition;
        PartitionEntry entry;
        entry.edge = decision.edge;
        for (int pos : decision.groups[b]) {
            entry.ops.push_back(parent_allowed[static_cast<std::size_t>(pos)]);
        }
        std::sort(entry.ops.begin(), entry.ops.end());
        child.partition.entries.push_back(std::move(entry));
        child.restriction = child.partition.to_restriction(graph);
        child.weights = parent.weights.restricted_copy(parent.restriction, child.restriction);
        children.push_back(std::move(child));
    }
    return children;
}

std::uint64_t leaf_seed(std::uint64_t root_seed, const std::string& label) {
    return derive_seed(root_seed, "leaf:" + label);
}

void restart(std::vector<SubSupernet>& leaves, const CellGraph& graph, std::uint64_t seed) {
    for (SubSupernet& leaf : leaves) {
        leaf.weights.reinit(graph, leaf.restriction, leaf_seed(seed, leaf.label));
    }
}

PipelineResult run_pipeline(const CellGraph& graph, const Dataset& data, const SearchConfig& cfg,
                            const PipelineOptions& options, std::size_t jobs) {
    graph.validate();
    cfg.validate(graph);
    if (cfg.num_splits > 0 && cfg.num_splits > graph.num_edges()) {
        throw ConfigError("schema infeasible: " + std::to_string(cfg.num_splits) +
                          " splits requested on " + std::to_string(graph.num_edges()) + " edges");
    }

    PipelineResult result;
    if (cfg.warm_epo == 0 && options.schema == SplitSchema::Gm && cfg.num_splits > 0) {
        result.notes.push_back(
            "warm_epo = 0 with the gm schema: gradients are collected at initialization and may "
            "be noisy");
    }

    std::vector<SubSupernet> leaves;
    {
        SubSupernet root;
        root.label = "root";
        root.restriction = Restriction::full(graph);
        root.weights = SharedWeights::init(graph, root.restriction, leaf_seed(cfg.seed, "root"));
        leaves.push_back(std::move(root));
    }

    GmConfig gm_cfg;
    gm_cfg.num_batches = cfg.gm_batches;
    gm_cfg.batch_size = cfg.optimizer.batch_size;
    gm_cfg.measure = cfg.similarity;

    // splitting phase
    for (std::size_t t = 1; t <= cfg.num_splits; ++t) {
        const int branching = cfg.branch_factors[t - 1];
        std::vector<SubSupernet> next_leaves;
        for (SubSupernet& leaf : leaves) {
            if (cfg.warm_epo > 0) {
                rsps_train(leaf.weights, graph, leaf.restriction, data, cfg.warm_epo,
                           cfg.optimizer,
                           derive_seed(cfg.seed, "warmup:" + leaf.label + ":t" + std::to_string(t)));
            }
            const std::vector<int> unsplit = leaf.partition.unsplit_edges(graph);
            if (unsplit.empty()) {
                throw NothingToSplitError("nothing to split in leaf " + leaf.label);
            }
            SplitDecision decision;
            if (options.schema == SplitSchema::Gm) {
                Rng gm_rng(derive_seed(cfg.seed, "gm:" + leaf.label + ":t" + std::to_string(t)));
                EdgeScores scores = score_edges(leaf.weights, graph, leaf.restriction, unsplit,
                                                data, gm_cfg, branching, gm_rng);
                decision = scores.per_edge.at(scores.selected_edge);
            } else {
                Rng pick_rng(
                    derive_seed(cfg.seed, "edgepick:" + leaf.label + ":t" + std::to_string(t)));
                const int edge = unsplit[pick_rng.next_below(unsplit.size())];
                const std::size_t ops =
                    leaf.restriction.allowed[static_cast<std::size_t>(edge)].size();
                if (options.schema == SplitSchema::Exhaustive) {
                    decision = exhaustive_split(edge, ops);
                } else {
                    Rng group_rng(
                        derive_seed(cfg.seed, "groups:" + leaf.label + ":t" + std::to_string(t)));
                    decision = random_split(edge, ops, branching, group_rng);
                }
            }
            std::vector<SubSupernet> children = instantiate_children(leaf, graph, decision);
            SplitRecord record;
            record.level = t;
            record.leaf_label = leaf.label;
            record.schema = options.schema;
            record.decision = decision;
            for (const auto& c : children) record.child_labels.push_back(c.label);
            result.tree.splits.push_back(std::move(record));
            for (auto& c : children) next_leaves.push_back(std::move(c));
        }
        leaves = std::move(next_leaves);
    }

    // restart: discard splitting-phase weights before the search phase
    if (options.restart && cfg.num_splits > 0) {
        restart(leaves, graph, cfg.seed);
    }

    // search phase
    result.leaf_logs.resize(leaves.size());
    result.derived.resize(leaves.size());
    parallel_for(leaves.size(), jobs, [&](std::size_t i) {
        SubSupernet& leaf = leaves[i];
        const std::uint64_t search_seed = derive_seed(cfg.seed, "search:" + leaf.label);
        TrainedSupernet log;
        if (cfg.method == SearchMethod::Rsps) {
            log = rsps_train(leaf.weights, graph, leaf.restriction, data, cfg.epochs,
                             cfg.optimizer, search_seed);
        } else {
            log = darts1_train(leaf.weights, graph, leaf.restriction, data, cfg.epochs,
                               cfg.optimizer, cfg.arch_lr, search_seed);
        }
        log.label = leaf.label;
        result.leaf_logs[i] = std::move(log);
        result.derived[i] =
            derive_architecture(leaf.weights, graph, leaf.restriction, cfg.method, data,
                                options.derive_cap, derive_seed(cfg.seed, "derive:" + leaf.label));
    });

    for (const SubSupernet& leaf : leaves) result.tree.leaf_labels.push_back(leaf.label);
    result.leaves = std::move(leaves);
    return result;
}

}  // namespace gmsplit
