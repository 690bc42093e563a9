#include "gmsplit/gm.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

const char* similarity_name(Similarity s) {
    switch (s) {
        case Similarity::Cosine: return "cosine";
        case Similarity::PerFilterCosine: return "per_filter_cosine";
        case Similarity::NegL2: return "neg_l2";
    }
    return "?";
}

std::optional<Similarity> similarity_from_name(const std::string& name) {
    if (name == "cosine") return Similarity::Cosine;
    if (name == "per_filter_cosine") return Similarity::PerFilterCosine;
    if (name == "neg_l2") return Similarity::NegL2;
    return std::nullopt;
}

double FlatGradient::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

void GMMatrix::validate() const {
    const std::size_t n = size();
    if (scores.size() != n) throw ShapeError("GM matrix row count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i].size() != n) throw ShapeError("GM matrix is not square");
        for (std::size_t j = 0; j < n; ++j) {
            if (scores[i][j] != scores[j][i]) throw ShapeError("GM matrix is not symmetric");
        }
        if (measure == Similarity::NegL2) {
            if (scores[i][i] != 0.0) throw ShapeError("neg_l2 GM diagonal must be 0");
        } else {
            if (scores[i][i] != 1.0) throw ShapeError("cosine GM diagonal must be 1");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (measure == Similarity::NegL2) {
                if (scores[i][j] > 0.0) throw ShapeError("neg_l2 GM entries must be <= 0");
            } else if (scores[i][j] < -1.0 || scores[i][j] > 1.0) {
                throw ShapeError("cosine GM entries must lie in [-1, 1]");
            }
        }
    }
}

double GMMatrix::cut_cost(const std::vector<std::vector<int>>& groups) const {
    std::vector<int> group_of(size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (int i : groups[g]) group_of.at(static_cast<std::size_t>(i)) = static_cast<int>(g);
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = i + 1; j < size(); ++j) {
            if (group_of[i] != group_of[j]) cost += scores[i][j];
        }
    }
    return cost;
}

namespace {

// gradients of every shared bundle (edges != target, head last), flattened
FlatGradient flatten_shared_grads(const SharedWeights& weights, const CellGraph& graph,
                                  int target_edge) {
    FlatGradient out;
    auto append_bundle = [&out](const ParamBundle& b) {
        out.bundle_offsets.push_back(out.values.size());
        for (const auto& p : b.params) {
            out.values.insert(out.values.end(), p.grad.values().begin(), p.grad.values().end());
        }
    };
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        if (static_cast<int>(e) == target_edge) continue;
        for (std::size_t o = 0; o < graph.edges[e].ops.size(); ++o) {
            if (const ParamBundle* b = weights.bundle(static_cast<int>(e), static_cast<int>(o))) {
                append_bundle(*b);
            }
        }
    }
    append_bundle(weights.head());
    return out;
}

std::vector<FlatGradient> per_batch_gradients(SharedWeights& weights, const CellGraph& graph,
                                              const Restriction& restriction, int edge, int pos,
                                              const std::vector<Batch>& batches) {
    if (edge < 0 || static_cast<std::size_t>(edge) >= graph.num_edges()) {
        throw ShapeError("gradient collection: unknown edge " + std::to_string(edge));
    }
    if (pos < 0 || static_cast<std::size_t>(pos) >= restriction.allowed[static_cast<std::size_t>(edge)].size()) {
        throw ShapeError("gradient collection: op position " + std::to_string(pos) +
                         " out of range on edge " + std::to_string(edge));
    }
    if (batches.empty()) throw ShapeError("gradient collection needs at least one batch");

    EdgeWeights ew = uniform_weights(restriction);
    auto& row = ew[static_cast<std::size_t>(edge)];
    std::fill(row.begin(), row.end(), 0.0);
    row[static_cast<std::size_t>(pos)] = 1.0;

    std::vector<FlatGradient> grads;
    grads.reserve(batches.size());
    for (const Batch& batch : batches) {
        cell_backward(weights, graph, restriction, ew, batch);
        grads.push_back(flatten_shared_grads(weights, graph, edge));
    }
    return grads;
}

std::string op_label_at(const CellGraph& graph, const Restriction& restriction, int edge, int pos) {
    const int op = restriction.allowed[static_cast<std::size_t>(edge)][static_cast<std::size_t>(pos)];
    return op_name(graph.edges[static_cast<std::size_t>(edge)].ops[static_cast<std::size_t>(op)]);
}

}  // namespace

FlatGradient collect_op_gradient(SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, int edge, int pos,
                                 const std::vector<Batch>& batches) {
    std::vector<FlatGradient> grads =
        per_batch_gradients(weights, graph, restriction, edge, pos, batches);
    FlatGradient avg = grads.front();
    for (std::size_t b = 1; b < grads.size(); ++b) {
        for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += grads[b].values[i];
    }
    const double inv = 1.0 / static_cast<double>(grads.size());
    for (double& v : avg.values) v *= inv;
    if (avg.norm() == 0.0) {
        throw DegenerateGradientError("degenerate gradient: zero norm on edge " +
                                      std::to_string(edge) + " op " +
                                      op_label_at(graph, restriction, edge, pos));
    }
    return avg;
}

FlatGradient collect_op_gradient(SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, int edge, int pos,
                                 const Dataset& data, std::size_t num_batches,
                                 std::size_t batch_size, Rng& rng) {
    const std::vector<Batch> batches =
        sample_batches(data, data.train_idx, num_batches, batch_size, rng);
    return collect_op_gradient(weights, graph, restriction, edge, pos, batches);
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo,
              std::size_t hi, bool* degenerate) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        *degenerate = true;
        return 0.0;
    }
    *degenerate = false;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double gm_score(const FlatGradient& g1, const FlatGradient& g2, Similarity measure) {
    if (g1.values.size() != g2.values.size() || g1.bundle_offsets != g2.bundle_offsets) {
        throw ShapeError("gm_score: gradient layouts differ");
    }
    const std::size_t n = g1.values.size();
    switch (measure) {
        case Similarity::Cosine: {
            bool degenerate = false;
            const double c = cosine(g1.values, g2.values, 0, n, &degenerate);
            if (degenerate) throw DegenerateGradientError("cosine of a zero-norm gradient");
            return c;
        }
        case Similarity::PerFilterCosine: {
            double total = 0.0;
            std::size_t used = 0;
            for (std::size_t b = 0; b < g1.bundle_offsets.size(); ++b) {
                const std::size_t lo = g1.bundle_offsets[b];
                const std::size_t hi =
                    b + 1 < g1.bundle_offsets.size() ? g1.bundle_offsets[b + 1] : n;
                bool degenerate = false;
                const double c = cosine(g1.values, g2.values, lo, hi, &degenerate);
                if (!degenerate) {
                    total += c;
                    ++used;
                }
            }
            if (used == 0) {
                throw DegenerateGradientError("per-filter cosine: every bundle degenerate");
            }
            return total / static_cast<double>(used);
        }
        case Similarity::NegL2: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = g1.values[i] - g2.values[i];
                s += d * d;
            }
            return -std::sqrt(s);
        }
    }
    throw ShapeError("unknown similarity measure");
}

GMMatrix build_gm_matrix(SharedWeights& weights, const CellGraph& graph,
                         const Restriction& restriction, int edge,
                         const std::vector<Batch>& batches, Similarity measure) {
    const auto& allowed = restriction.allowed.at(static_cast<std::size_t>(edge));
    GMMatrix gm;
    gm.edge = edge;
    gm.measure = measure;
    gm.num_batches = batches.size();
    for (std::size_t pos = 0; pos < allowed.size(); ++pos) {
        gm.op_labels.push_back(op_label_at(graph, restriction, edge, static_cast<int>(pos)));
    }

    std::vector<FlatGradient> grads;
    grads.reserve(allowed.size());
    for (std::size_t pos = 0; pos < allowed.size(); ++pos) {
        try {
            grads.push_back(
                collect_op_gradient(weights, graph, restriction, edge, static_cast<int>(pos), batches));
        } catch (const DegenerateGradientError& err) {
            throw DegenerateGradientError(std::string(err.what()) + " while building GM matrix");
        }
    }

    const std::size_t n = allowed.size();
    gm.scores.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        gm.scores[i][i] = measure == Similarity::NegL2 ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = gm_score(grads[i], grads[j], measure);
            if (measure != Similarity::NegL2) s = std::clamp(s, -1.0, 1.0);
            gm.scores[i][j] = s;
            gm.scores[j][i] = s;
        }
    }
    gm.validate();
    return gm;
}

GMMatrix build_gm_matrix(SharedWeights& weights, const CellGraph& graph,
                         const Restriction& restriction, int edge, const Dataset& data,
                         const GmConfig& cfg, Rng& rng) {
    const std::vector<Batch> batches =
        sample_batches(data, data.train_idx, cfg.num_batches, cfg.batch_size, rng);
    if (!cfg.score_per_batch) {
        return build_gm_matrix(weights, graph, restriction, edge, batches, cfg.measure);
    }
    // study variant: score each batch separately, then average the scores
    const auto& allowed = restriction.allowed.at(static_cast<std::size_t>(edge));
    const std::size_t n = allowed.size();
    std::vector<std::vector<FlatGradient>> per_op;
    per_op.reserve(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        per_op.push_back(per_batch_gradients(weights, graph, restriction, edge,
                                             static_cast<int>(pos), batches));
    }
    GMMatrix gm;
    gm.edge = edge;
    gm.measure = cfg.measure;
    gm.num_batches = batches.size();
    for (std::size_t pos = 0; pos < n; ++pos) {
        gm.op_labels.push_back(op_label_at(graph, restriction, edge, static_cast<int>(pos)));
    }
    gm.scores.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        gm.scores[i][i] = cfg.measure == Similarity::NegL2 ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t b = 0; b < batches.size(); ++b) {
                s += gm_score(per_op[i][b], per_op[j][b], cfg.measure);
            }
            s /= static_cast<double>(batches.size());
            if (cfg.measure != Similarity::NegL2) s = std::clamp(s, -1.0, 1.0);
            gm.scores[i][j] = s;
            gm.scores[j][i] = s;
        }
    }
    gm.validate();
    return gm;
}

namespace {

struct CutSearch {
    const GMMatrix* gm = nullptr;
    int branching = 0;
    int min_size = 0;  // q
    int max_size = 0;  // q or q+1
    std::vector<int> assignment;
    std::vector<int> fill;
    std::vector<int> best_assignment;
    double best_cost = 0.0;
    bool found = false;

    // No cost pruning: cosine scores may be negative, so partial sums are not
    // monotone. The op sets are tiny (<= 8), exhaustive walk is fine.
    void recurse(std::size_t i, int groups_open, double cost_so_far) {
        const std::size_t n = gm->size();
        if (i == n) {
            if (groups_open != branching) return;
            for (int g = 0; g < branching; ++g) {
                if (fill[static_cast<std::size_t>(g)] < min_size) return;
            }
            if (!found || cost_so_far < best_cost) {
                found = true;
                best_cost = cost_so_far;
                best_assignment = assignment;
            }
            return;
        }
        // canonical form: op i may join an existing group or open group
        // `groups_open`; lexicographic ascending order falls out naturally
        const int limit = std::min(groups_open + 1, branching);
        for (int g = 0; g < limit; ++g) {
            if (fill[static_cast<std::size_t>(g)] >= max_size) continue;
            double delta = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                if (assignment[j] != g) delta += gm->scores[j][i];
            }
            assignment[i] = g;
            ++fill[static_cast<std::size_t>(g)];
            recurse(i + 1, std::max(groups_open, g + 1), cost_so_far + delta);
            --fill[static_cast<std::size_t>(g)];
            assignment[i] = -1;
        }
    }
};

}  // namespace

SplitDecision balanced_min_cut(const GMMatrix& gm, int branching) {
    const std::size_t n = gm.size();
    if (branching < 2 || static_cast<std::size_t>(branching) > n) {
        throw ShapeError("branching factor " + std::to_string(branching) + " invalid for " +
                         std::to_string(n) + " ops");
    }
    gm.validate();

    CutSearch search;
    search.gm = &gm;
    search.branching = branching;
    const int q = static_cast<int>(n) / branching;
    const int r = static_cast<int>(n) % branching;
    search.min_size = q;
    search.max_size = r > 0 ? q + 1 : q;
    search.assignment.assign(n, -1);
    search.fill.assign(static_cast<std::size_t>(branching), 0);
    search.recurse(0, 0, 0.0);

    SplitDecision out;
    out.edge = gm.edge;
    out.groups.assign(static_cast<std::size_t>(branching), {});
    for (std::size_t i = 0; i < n; ++i) {
        out.groups[static_cast<std::size_t>(search.best_assignment[i])].push_back(static_cast<int>(i));
    }
    out.cut_cost = search.best_cost;
    out.gm = gm;
    return out;
}

SplitDecision exhaustive_split(int edge, std::size_t num_ops, const std::optional<GMMatrix>& gm) {
    SplitDecision out;
    out.edge = edge;
    for (std::size_t i = 0; i < num_ops; ++i) out.groups.push_back({static_cast<int>(i)});
    if (gm) {
        out.gm = gm;
        out.cut_cost = gm->cut_cost(out.groups);
    }
    return out;
}

SplitDecision random_split(int edge, std::size_t num_ops, int branching, Rng& rng,
                           const std::optional<GMMatrix>& gm) {
    if (branching < 2 || static_cast<std::size_t>(branching) > num_ops) {
        throw ShapeError("branching factor " + std::to_string(branching) + " invalid for " +
                         std::to_string(num_ops) + " ops");
    }
    std::vector<std::size_t> order = rng.permutation(num_ops);
    const std::size_t q = num_ops / static_cast<std::size_t>(branching);
    const std::size_t r = num_ops % static_cast<std::size_t>(branching);
    SplitDecision out;
    out.edge = edge;
    std::size_t at = 0;
    for (std::size_t g = 0; g < static_cast<std::size_t>(branching); ++g) {
        const std::size_t take = q + (g < r ? 1 : 0);
        std::vector<int> group;
        for (std::size_t k = 0; k < take; ++k) group.push_back(static_cast<int>(order[at++]));
        std::sort(group.begin(), group.end());
        out.groups.push_back(std::move(group));
    }
    std::sort(out.groups.begin(), out.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    if (gm) {
        out.gm = gm;
        out.cut_cost = gm->cut_cost(out.groups);
    }
    return out;
}

int select_edge(const std::map<int, SplitDecision>& per_edge) {
    if (per_edge.empty()) {
        throw NothingToSplitError("nothing to split: no candidate edges");
    }
    int best = -1;
    for (const auto& [edge, decision] : per_edge) {  // ascending ids, ties keep the first
        if (best < 0) {
            best = edge;
            continue;
        }
        const auto& incumbent = per_edge.at(best).cut_cost;
        if (decision.cut_cost && (!incumbent || *decision.cut_cost < *incumbent)) {
            best = edge;
        }
    }
    return best;
}

EdgeScores score_edges(SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const std::vector<int>& unsplit_edges,
                       const Dataset& data, const GmConfig& cfg, int branching, Rng& rng) {
    if (unsplit_edges.empty()) {
        throw NothingToSplitError("nothing to split: every edge already partitioned");
    }
    const std::vector<Batch> batches =
        sample_batches(data, data.train_idx, cfg.num_batches, cfg.batch_size, rng);

    EdgeScores out;
    for (int edge : unsplit_edges) {
        GMMatrix gm = build_gm_matrix(weights, graph, restriction, edge, batches, cfg.measure);
        out.per_edge.emplace(edge, balanced_min_cut(gm, branching));
    }
    out.selected_edge = select_edge(out.per_edge);
    return out;
}

}  // namespace gmsplit
