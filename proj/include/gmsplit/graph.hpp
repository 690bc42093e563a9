#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "gmsplit/ops.hpp"

namespace gmsplit {

struct CellEdge {
    int from = 0;
    int to = 0;
    std::vector<OpKind> ops;  // O^(e), ordered, no duplicate kinds
};

// The supernet cell: DAG of nodes with one op set per edge. Node 0 is the
// input, the last node feeds the classifier head. Edges are identified by
// their index in `edges`.
struct CellGraph {
    int num_nodes = 0;
    std::vector<CellEdge> edges;
    std::size_t feature_dim = 0;
    int num_classes = 0;

    std::size_t num_edges() const { return edges.size(); }
    void validate() const;  // throws ConfigError on malformed graphs

    // stable description hash used to pair oracle tables with spaces
    std::uint64_t space_hash() const;

    // 3 nodes / 3 edges / 4 ops (zero, skip, linear_tanh, linear_relu): 64
    // children, small enough for exhaustive oracles
    static CellGraph toy_space(std::size_t feature_dim = 8, int num_classes = 3);
    // 4 nodes / 6 edges / 5 ops for sampled-oracle experiments
    static CellGraph wide_space(std::size_t feature_dim = 8, int num_classes = 3);
};

// One operation choice per edge; indices refer to the owning graph's op sets
// so an Architecture means the same child in every sub-supernet.
struct Architecture {
    std::vector<int> choice;

    std::string encode() const;  // "1-0-3"
    static Architecture decode(const std::string& text, const CellGraph& graph);
    auto operator<=>(const Architecture&) const = default;
};

// Per-edge allowed op indices (ascending, into the full op set). A supernet
// restricted by a partition set reduces to one of these.
struct Restriction {
    std::vector<std::vector<int>> allowed;

    static Restriction full(const CellGraph& graph);
    void validate(const CellGraph& graph) const;
    std::size_t num_children() const;
    bool contains(const Architecture& arch) const;
};

}  // namespace gmsplit
