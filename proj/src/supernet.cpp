#include "gmsplit/supernet.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

EdgeWeights one_hot_weights(const Restriction& restriction, const Architecture& arch) {
    if (arch.choice.size() != restriction.allowed.size()) {
        throw ShapeError("architecture has " + std::to_string(arch.choice.size()) +
                         " choices for " + std::to_string(restriction.allowed.size()) + " edges");
    }
    EdgeWeights w(restriction.allowed.size());
    for (std::size_t e = 0; e < restriction.allowed.size(); ++e) {
        const auto& allowed = restriction.allowed[e];
        const auto it = std::find(allowed.begin(), allowed.end(), arch.choice[e]);
        if (it == allowed.end()) {
            throw ShapeError("edge " + std::to_string(e) + ": op " +
                             std::to_string(arch.choice[e]) + " not allowed by restriction");
        }
        w[e].assign(allowed.size(), 0.0);
        w[e][static_cast<std::size_t>(it - allowed.begin())] = 1.0;
    }
    return w;
}

EdgeWeights uniform_weights(const Restriction& restriction) {
    EdgeWeights w(restriction.allowed.size());
    for (std::size_t e = 0; e < restriction.allowed.size(); ++e) {
        w[e].assign(restriction.allowed[e].size(),
                    1.0 / static_cast<double>(restriction.allowed[e].size()));
    }
    return w;
}

EdgeWeights softmax_weights(const std::vector<std::vector<double>>& arch_params) {
    EdgeWeights w(arch_params.size());
    for (std::size_t e = 0; e < arch_params.size(); ++e) {
        const auto& a = arch_params[e];
        if (a.empty()) throw ShapeError("empty arch param vector on edge " + std::to_string(e));
        const double mx = *std::max_element(a.begin(), a.end());
        double denom = 0.0;
        w[e].resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            w[e][i] = std::exp(a[i] - mx);
            denom += w[e][i];
        }
        for (double& v : w[e]) v /= denom;
    }
    return w;
}

std::vector<Architecture> enumerate_children(const CellGraph& graph,
                                             const Restriction& restriction) {
    restriction.validate(graph);
    std::vector<Architecture> out;
    out.reserve(restriction.num_children());
    Architecture cur;
    cur.choice.assign(graph.num_edges(), 0);
    std::vector<std::size_t> pos(graph.num_edges(), 0);
    while (true) {
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            cur.choice[e] = restriction.allowed[e][pos[e]];
        }
        out.push_back(cur);
        // odometer, last edge fastest
        std::size_t e = graph.num_edges();
        while (e > 0) {
            --e;
            if (++pos[e] < restriction.allowed[e].size()) break;
            pos[e] = 0;
            if (e == 0) return out;
        }
    }
}

Architecture sample_uniform_arch(const CellGraph& graph, const Restriction& restriction,
                                 Rng& rng) {
    Architecture arch;
    arch.choice.resize(graph.num_edges());
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        const auto& allowed = restriction.allowed[e];
        arch.choice[e] = allowed[rng.next_below(allowed.size())];
    }
    return arch;
}

namespace {

std::string edge_context(const CellGraph& graph, std::size_t e, int op) {
    return "edge " + std::to_string(e) + " (" + std::to_string(graph.edges[e].from) + "->" +
           std::to_string(graph.edges[e].to) + ") op " + op_name(graph.edges[e].ops[op]);
}

void check_weights_shape(const Restriction& restriction, const EdgeWeights& edge_weights) {
    if (edge_weights.size() != restriction.allowed.size()) {
        throw ShapeError("edge weight table covers " + std::to_string(edge_weights.size()) +
                         " edges, restriction has " + std::to_string(restriction.allowed.size()));
    }
    for (std::size_t e = 0; e < edge_weights.size(); ++e) {
        if (edge_weights[e].size() != restriction.allowed[e].size()) {
            throw ShapeError("edge " + std::to_string(e) + ": " +
                             std::to_string(edge_weights[e].size()) + " mixing weights for " +
                             std::to_string(restriction.allowed[e].size()) + " allowed ops");
        }
    }
}

Tensor apply_head(const ParamBundle& head, const Tensor& x) {
    Tensor logits = matmul(x, head.params[0].value);
    const Tensor& b = head.params[1].value;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        for (std::size_t c = 0; c < logits.cols(); ++c) logits.at(r, c) += b[c];
    }
    return logits;
}

}  // namespace

CellTrace cell_forward(const SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const EdgeWeights& edge_weights,
                       const Tensor& x, bool keep_all_ops) {
    check_weights_shape(restriction, edge_weights);
    if (x.cols() != graph.feature_dim) {
        throw ShapeError("input " + x.shape_str() + " does not match feature_dim " +
                         std::to_string(graph.feature_dim));
    }
    CellTrace trace;
    trace.node_values.assign(static_cast<std::size_t>(graph.num_nodes),
                             Tensor({x.rows(), graph.feature_dim}));
    trace.node_values[0] = x;
    trace.op_outputs.resize(graph.num_edges());

    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        const CellEdge& edge = graph.edges[e];
        const Tensor& in = trace.node_values[static_cast<std::size_t>(edge.from)];
        Tensor& out = trace.node_values[static_cast<std::size_t>(edge.to)];
        trace.op_outputs[e].resize(restriction.allowed[e].size());
        for (std::size_t pos = 0; pos < restriction.allowed[e].size(); ++pos) {
            const double w = edge_weights[e][pos];
            if (w == 0.0 && !keep_all_ops) continue;
            const int op = restriction.allowed[e][pos];
            Tensor y = op_forward(edge.ops[static_cast<std::size_t>(op)],
                                  weights.bundle(static_cast<int>(e), op), in,
                                  edge_context(graph, e, op));
            if (w != 0.0) {
                for (std::size_t i = 0; i < y.size(); ++i) out[i] += w * y[i];
            }
            trace.op_outputs[e][pos] = std::move(y);
        }
    }
    trace.logits = apply_head(weights.head(), trace.node_values.back());
    trace.logits.check_finite("cell logits");
    return trace;
}

double cell_backward(SharedWeights& weights, const CellGraph& graph,
                     const Restriction& restriction, const EdgeWeights& edge_weights,
                     const Batch& batch, EdgeWeights* mixture_grads) {
    CellTrace trace =
        cell_forward(weights, graph, restriction, edge_weights, batch.x, mixture_grads != nullptr);
    const LossResult lr = cross_entropy(trace.logits, batch.labels);

    weights.zero_all_grads();
    if (mixture_grads) {
        mixture_grads->assign(graph.num_edges(), {});
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            (*mixture_grads)[e].assign(restriction.allowed[e].size(), 0.0);
        }
    }

    // head backward
    ParamBundle& head = weights.head();
    const Tensor& last = trace.node_values.back();
    head.params[0].grad = matmul_tn(last, lr.logit_grad);
    for (std::size_t r = 0; r < lr.logit_grad.rows(); ++r) {
        for (std::size_t c = 0; c < lr.logit_grad.cols(); ++c) {
            head.params[1].grad[c] += lr.logit_grad.at(r, c);
        }
    }

    std::vector<Tensor> node_grads(static_cast<std::size_t>(graph.num_nodes),
                                   Tensor({batch.x.rows(), graph.feature_dim}));
    node_grads.back() = matmul_nt(lr.logit_grad, head.params[0].value);

    // edges in reverse id order: edge targets only increase with id is not
    // guaranteed, so walk nodes from the top and fold in every incoming edge
    for (int node = graph.num_nodes - 1; node >= 1; --node) {
        const Tensor& g_node = node_grads[static_cast<std::size_t>(node)];
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            const CellEdge& edge = graph.edges[e];
            if (edge.to != node) continue;
            const Tensor& in = trace.node_values[static_cast<std::size_t>(edge.from)];
            for (std::size_t pos = 0; pos < restriction.allowed[e].size(); ++pos) {
                const double w = edge_weights[e][pos];
                const int op = restriction.allowed[e][pos];
                if (mixture_grads) {
                    const Tensor& y = trace.op_outputs[e][pos];
                    double dot = 0.0;
                    for (std::size_t i = 0; i < y.size(); ++i) dot += g_node[i] * y[i];
                    (*mixture_grads)[e][pos] = dot;
                }
                if (w == 0.0) continue;
                Tensor upstream(g_node.shape());
                for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] = w * g_node[i];
                OpBackwardResult ob =
                    op_backward(edge.ops[static_cast<std::size_t>(op)],
                                weights.bundle(static_cast<int>(e), op), in, upstream,
                                edge_context(graph, e, op));
                Tensor& g_from = node_grads[static_cast<std::size_t>(edge.from)];
                for (std::size_t i = 0; i < g_from.size(); ++i) g_from[i] += ob.input_grad[i];
                if (!ob.param_grads.empty()) {
                    ParamBundle* b = weights.bundle(static_cast<int>(e), op);
                    for (std::size_t k = 0; k < ob.param_grads.size(); ++k) {
                        Tensor& dst = b->params[k].grad;
                        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += ob.param_grads[k][i];
                    }
                }
            }
        }
    }
    return lr.loss;
}

Tensor forward_child(const SharedWeights& weights, const CellGraph& graph,
                     const Architecture& arch, const Tensor& x) {
    const Restriction full = Restriction::full(graph);
    return cell_forward(weights, graph, full, one_hot_weights(full, arch), x).logits;
}

double backward_child(SharedWeights& weights, const CellGraph& graph, const Architecture& arch,
                      const Batch& batch) {
    const Restriction full = Restriction::full(graph);
    return cell_backward(weights, graph, full, one_hot_weights(full, arch), batch);
}

Tensor mixture_forward(const SharedWeights& weights, const CellGraph& graph,
                       const Restriction& restriction, const Tensor& x) {
    return cell_forward(weights, graph, restriction, softmax_weights(weights.arch_params()), x)
        .logits;
}

namespace {
EvalResult evaluate_logits_fn(const Dataset& data, const std::vector<std::size_t>& split,
                              const std::function<Tensor(const Tensor&)>& logits_fn) {
    Batch b = gather_batch(data, split);
    Tensor logits = logits_fn(b.x);
    EvalResult r;
    r.loss = cross_entropy(logits, b.labels).loss;
    r.acc = accuracy(logits, b.labels);
    return r;
}
}  // namespace

EvalResult evaluate_child(const SharedWeights& weights, const CellGraph& graph,
                          const Architecture& arch, const Dataset& data,
                          const std::vector<std::size_t>& split) {
    return evaluate_logits_fn(data, split,
                              [&](const Tensor& x) { return forward_child(weights, graph, arch, x); });
}

EvalResult evaluate_mixture(const SharedWeights& weights, const CellGraph& graph,
                            const Restriction& restriction, const Dataset& data,
                            const std::vector<std::size_t>& split) {
    return evaluate_logits_fn(data, split, [&](const Tensor& x) {
        return mixture_forward(weights, graph, restriction, x);
    });
}

}  // namespace gmsplit
