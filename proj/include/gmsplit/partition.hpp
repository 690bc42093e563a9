#pragma once

#include <string>
#include <vector>

#include "gmsplit/search.hpp"

namespace gmsplit {

// One (edge, allowed ops) record per split edge, in split order. Uniquely
// identifies a sub-supernet: split edges carry their assigned subset, all
// other edges keep the full op set.
struct PartitionEntry {
    int edge = 0;
    std::vector<int> ops;  // ascending indices into the edge's full op set
};

struct PartitionSet {
    std::vector<PartitionEntry> entries;

    bool has_edge(int edge) const;
    Restriction to_restriction(const CellGraph& graph) const;
    std::vector<int> unsplit_edges(const CellGraph& graph) const;
    void validate(const CellGraph& graph) const;
};

struct SubSupernet {
    std::string label;
    std::string parent_label;
    PartitionSet partition;
    Restriction restriction;
    SharedWeights weights;
};

enum class SplitSchema { Gm, Exhaustive, Random };

const char* split_schema_name(SplitSchema s);
std::optional<SplitSchema> split_schema_from_name(const std::string& name);

struct SplitRecord {
    std::size_t level = 0;  // 1-based split index t
    std::string leaf_label;
    SplitSchema schema = SplitSchema::Gm;
    SplitDecision decision;
    std::vector<std::string> child_labels;
};

struct PartitionTree {
    std::vector<SplitRecord> splits;
    std::vector<std::string> leaf_labels;
};

// Each child extends the parent's partition with one group of the decision,
// deep-copies the parent's weights restricted to that group (bundles and arch
// logits for dropped ops vanish), and gets label "<parent>/<b>".
std::vector<SubSupernet> instantiate_children(const SubSupernet& parent, const CellGraph& graph,
                                              const SplitDecision& decision);

// Fresh init from a per-leaf derived seed; momentum and arch logits included.
void restart(std::vector<SubSupernet>& leaves, const CellGraph& graph, std::uint64_t seed);

std::uint64_t leaf_seed(std::uint64_t root_seed, const std::string& label);

struct PipelineOptions {
    SplitSchema schema = SplitSchema::Gm;
    bool restart = true;
    std::size_t derive_cap = 256;
};

struct PipelineResult {
    PartitionTree tree;
    std::vector<SubSupernet> leaves;
    std::vector<TrainedSupernet> leaf_logs;      // aligned with leaves
    std::vector<Architecture> derived;           // aligned with leaves
    std::vector<std::string> notes;
};

// warmup -> split -> recurse -> restart -> search -> derive. Warmup always
// uses uniform-path sampling; the configured method only drives the final
// search phase.
PipelineResult run_pipeline(const CellGraph& graph, const Dataset& data, const SearchConfig& cfg,
                            const PipelineOptions& options, std::size_t jobs = 1);

}  // namespace gmsplit
