#include "gmsplit/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "gmsplit/errors.hpp"

namespace gmsplit {

void CellGraph::validate() const {
    if (num_nodes < 2) throw ConfigError("cell graph needs at least 2 nodes");
    if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
    if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
    if (edges.empty()) throw ConfigError("cell graph needs at least one edge");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const CellEdge& edge = edges[e];
        if (edge.from < 0 || edge.to >= num_nodes || edge.from >= edge.to) {
            throw ConfigError("edge " + std::to_string(e) + " must satisfy 0 <= from < to < nodes");
        }
        if (edge.ops.empty()) throw ConfigError("edge " + std::to_string(e) + " has an empty op set");
        std::set<OpKind> seen(edge.ops.begin(), edge.ops.end());
        if (seen.size() != edge.ops.size()) {
            throw ConfigError("edge " + std::to_string(e) + " lists a duplicate op kind");
        }
    }
}

std::uint64_t CellGraph::space_hash() const {
    std::ostringstream os;
    os << num_nodes << ";" << feature_dim << ";" << num_classes;
    for (const auto& e : edges) {
        os << ";" << e.from << ">" << e.to << ":";
        for (std::size_t i = 0; i < e.ops.size(); ++i) {
            if (i) os << ",";
            os << op_name(e.ops[i]);
        }
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CellGraph CellGraph::toy_space(std::size_t feature_dim, int num_classes) {
    const std::vector<OpKind> ops{OpKind::Zero, OpKind::Skip, OpKind::LinearTanh,
                                  OpKind::LinearRelu};
    CellGraph g;
    g.num_nodes = 3;
    g.feature_dim = feature_dim;
    g.num_classes = num_classes;
    g.edges = {{0, 1, ops}, {0, 2, ops}, {1, 2, ops}};
    g.validate();
    return g;
}

CellGraph CellGraph::wide_space(std::size_t feature_dim, int num_classes) {
    const std::vector<OpKind> ops{OpKind::Zero, OpKind::Skip, OpKind::LinearTanh,
                                  OpKind::LinearRelu, OpKind::FeatAvg};
    CellGraph g;
    g.num_nodes = 4;
    g.feature_dim = feature_dim;
    g.num_classes = num_classes;
    g.edges = {{0, 1, ops}, {0, 2, ops}, {0, 3, ops}, {1, 2, ops}, {1, 3, ops}, {2, 3, ops}};
    g.validate();
    return g;
}

std::string Architecture::encode() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < choice.size(); ++i) {
        if (i) os << "-";
        os << choice[i];
    }
    return os.str();
}

Architecture Architecture::decode(const std::string& text, const CellGraph& graph) {
    Architecture arch;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '-')) {
        arch.choice.push_back(std::stoi(part));
    }
    if (arch.choice.size() != graph.num_edges()) {
        throw ConfigError("architecture '" + text + "' has " + std::to_string(arch.choice.size()) +
                          " choices for " + std::to_string(graph.num_edges()) + " edges");
    }
    for (std::size_t e = 0; e < arch.choice.size(); ++e) {
        if (arch.choice[e] < 0 || static_cast<std::size_t>(arch.choice[e]) >= graph.edges[e].ops.size()) {
            throw ConfigError("architecture '" + text + "' op index out of range on edge " +
                              std::to_string(e));
        }
    }
    return arch;
}

Restriction Restriction::full(const CellGraph& graph) {
    Restriction r;
    r.allowed.resize(graph.num_edges());
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        r.allowed[e].resize(graph.edges[e].ops.size());
        for (std::size_t o = 0; o < graph.edges[e].ops.size(); ++o) {
            r.allowed[e][o] = static_cast<int>(o);
        }
    }
    return r;
}

void Restriction::validate(const CellGraph& graph) const {
    if (allowed.size() != graph.num_edges()) {
        throw ConfigError("restriction covers " + std::to_string(allowed.size()) + " edges, graph has " +
                          std::to_string(graph.num_edges()));
    }
    for (std::size_t e = 0; e < allowed.size(); ++e) {
        if (allowed[e].empty()) {
            throw ConfigError("restriction empties edge " + std::to_string(e));
        }
        if (!std::is_sorted(allowed[e].begin(), allowed[e].end())) {
            throw ConfigError("restriction op list on edge " + std::to_string(e) + " must be ascending");
        }
        for (int o : allowed[e]) {
            if (o < 0 || static_cast<std::size_t>(o) >= graph.edges[e].ops.size()) {
                throw ConfigError("restriction references unknown op " + std::to_string(o) +
                                  " on edge " + std::to_string(e));
            }
        }
        if (std::adjacent_find(allowed[e].begin(), allowed[e].end()) != allowed[e].end()) {
            throw ConfigError("restriction repeats an op on edge " + std::to_string(e));
        }
    }
}

std::size_t Restriction::num_children() const {
    std::size_t n = 1;
    for (const auto& a : allowed) n *= a.size();
    return n;
}

bool Restriction::contains(const Architecture& arch) const {
    if (arch.choice.size() != allowed.size()) return false;
    for (std::size_t e = 0; e < allowed.size(); ++e) {
        if (!std::binary_search(allowed[e].begin(), allowed[e].end(), arch.choice[e])) return false;
    }
    return true;
}

}  // namespace gmsplit
