#include "gmsplit/search.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

const char* search_method_name(SearchMethod m) {
    return m == SearchMethod::Rsps ? "rsps" : "darts1";
}

std::optional<SearchMethod> search_method_from_name(const std::string& name) {
    if (name == "rsps") return SearchMethod::Rsps;
    if (name == "darts1") return SearchMethod::Darts1;
    return std::nullopt;
}

void SearchConfig::validate(const CellGraph& graph) const {
    if (branch_factors.size() != num_splits) {
        throw ConfigError("branch_factors lists " + std::to_string(branch_factors.size()) +
                          " entries for num_splits = " + std::to_string(num_splits));
    }
    if (num_splits > graph.num_edges()) {
        throw ConfigError("num_splits " + std::to_string(num_splits) + " exceeds " +
                          std::to_string(graph.num_edges()) + " edges");
    }
    std::size_t min_ops = SIZE_MAX;
    for (const auto& e : graph.edges) min_ops = std::min(min_ops, e.ops.size());
    for (int b : branch_factors) {
        if (b < 2 || static_cast<std::size_t>(b) > min_ops) {
            throw ConfigError("branch factor " + std::to_string(b) +
                              " invalid for minimum op-set size " + std::to_string(min_ops));
        }
    }
    if (optimizer.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (optimizer.momentum < 0.0 || optimizer.momentum >= 1.0) {
        throw ConfigError("momentum must lie in [0, 1)");
    }
    if (optimizer.weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (optimizer.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (method == SearchMethod::Darts1 && arch_lr < 0.0) {
        throw ConfigError("arch_lr must be non-negative");
    }
    if (gm_batches == 0) throw ConfigError("gm_batches must be positive");
}

namespace {

EpochStats evaluate_epoch(const SharedWeights& weights, const CellGraph& graph,
                          const Restriction& restriction, const Dataset& data,
                          double train_loss) {
    const EvalResult valid = evaluate_mixture(weights, graph, restriction, data, data.valid_idx);
    return EpochStats{train_loss, valid.loss, valid.acc};
}

void finalize(TrainedSupernet& out, const SharedWeights& weights, const CellGraph& graph,
              const Restriction& restriction, const Dataset& data) {
    const EvalResult train = evaluate_mixture(weights, graph, restriction, data, data.train_idx);
    const EvalResult valid = evaluate_mixture(weights, graph, restriction, data, data.valid_idx);
    out.final_train_loss = train.loss;
    out.final_valid_loss = valid.loss;
    out.final_valid_acc = valid.acc;
}

}  // namespace

double rsps_train_one_epoch(SharedWeights& weights, const CellGraph& graph,
                            const Restriction& restriction, const Dataset& data,
                            std::size_t epoch, std::size_t horizon_epochs,
                            const OptimizerConfig& optimizer, std::uint64_t seed) {
    Rng batch_rng(derive_seed(seed, "rsps-epoch", epoch));
    Rng arch_rng(derive_seed(seed, "rsps-arch", epoch));
    const std::vector<Batch> batches =
        epoch_batches(data, data.train_idx, optimizer.batch_size, batch_rng);
    double loss_sum = 0.0;
    for (std::size_t step = 0; step < batches.size(); ++step) {
        const Architecture arch = sample_uniform_arch(graph, restriction, arch_rng);
        const EdgeWeights ew = one_hot_weights(restriction, arch);
        loss_sum += cell_backward(weights, graph, restriction, ew, batches[step]);
        const double t = (static_cast<double>(epoch) +
                          static_cast<double>(step + 1) / static_cast<double>(batches.size())) /
                         static_cast<double>(horizon_epochs);
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            if (ParamBundle* b = weights.bundle(static_cast<int>(e), arch.choice[e])) {
                sgd_step(*b, optimizer, t);
            }
        }
        sgd_step(weights.head(), optimizer, t);
    }
    return loss_sum / static_cast<double>(batches.size());
}

TrainedSupernet rsps_train(SharedWeights& weights, const CellGraph& graph,
                           const Restriction& restriction, const Dataset& data,
                           std::size_t epochs, const OptimizerConfig& optimizer,
                           std::uint64_t seed) {
    restriction.validate(graph);
    TrainedSupernet out;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const double train_loss = rsps_train_one_epoch(weights, graph, restriction, data, epoch,
                                                       epochs, optimizer, seed);
        out.epoch_log.push_back(evaluate_epoch(weights, graph, restriction, data, train_loss));
    }
    finalize(out, weights, graph, restriction, data);
    return out;
}

TrainedSupernet darts1_train(SharedWeights& weights, const CellGraph& graph,
                             const Restriction& restriction, const Dataset& data,
                             std::size_t epochs, const OptimizerConfig& optimizer, double arch_lr,
                             std::uint64_t seed) {
    restriction.validate(graph);
    TrainedSupernet out;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        Rng train_rng(derive_seed(seed, "darts-train-epoch", epoch));
        Rng valid_rng(derive_seed(seed, "darts-valid-epoch", epoch));
        const std::vector<Batch> train_batches =
            epoch_batches(data, data.train_idx, optimizer.batch_size, train_rng);
        const std::size_t valid_bs = std::min(optimizer.batch_size, data.valid_idx.size());
        const std::vector<Batch> valid_batches =
            epoch_batches(data, data.valid_idx, valid_bs, valid_rng);

        double loss_sum = 0.0;
        for (std::size_t step = 0; step < train_batches.size(); ++step) {
            // arch step on a valid batch, weights frozen
            {
                const Batch& vb = valid_batches[step % valid_batches.size()];
                EdgeWeights mix = softmax_weights(weights.arch_params());
                EdgeWeights mixture_grads;
                cell_backward(weights, graph, restriction, mix, vb, &mixture_grads);
                for (std::size_t e = 0; e < graph.num_edges(); ++e) {
                    const auto& w = mix[e];
                    const auto& mg = mixture_grads[e];
                    double inner = 0.0;
                    for (std::size_t k = 0; k < w.size(); ++k) inner += mg[k] * w[k];
                    auto& logits = weights.arch_params()[e];
                    for (std::size_t k = 0; k < w.size(); ++k) {
                        logits[k] -= arch_lr * w[k] * (mg[k] - inner);
                    }
                }
            }
            // weight step on a train batch
            {
                const EdgeWeights mix = softmax_weights(weights.arch_params());
                loss_sum += cell_backward(weights, graph, restriction, mix, train_batches[step]);
                const double t =
                    (static_cast<double>(epoch) +
                     static_cast<double>(step + 1) / static_cast<double>(train_batches.size())) /
                    static_cast<double>(epochs);
                for (std::size_t e = 0; e < graph.num_edges(); ++e) {
                    for (int op : restriction.allowed[e]) {
                        if (ParamBundle* b = weights.bundle(static_cast<int>(e), op)) {
                            sgd_step(*b, optimizer, t);
                        }
                    }
                }
                sgd_step(weights.head(), optimizer, t);
            }
        }
        out.epoch_log.push_back(evaluate_epoch(weights, graph, restriction, data,
                                               loss_sum / static_cast<double>(train_batches.size())));
    }
    finalize(out, weights, graph, restriction, data);
    return out;
}

Architecture derive_architecture(const SharedWeights& weights, const CellGraph& graph,
                                 const Restriction& restriction, SearchMethod method,
                                 const Dataset& data, std::size_t eval_cap, std::uint64_t seed) {
    if (method == SearchMethod::Darts1) {
        Architecture arch;
        arch.choice.resize(graph.num_edges());
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            const auto& logits = weights.arch_params()[e];
            std::size_t best = 0;
            for (std::size_t k = 1; k < logits.size(); ++k) {
                if (logits[k] > logits[best]) best = k;
            }
            arch.choice[e] = restriction.allowed[e][best];
        }
        return arch;
    }

    std::vector<Architecture> children = enumerate_children(graph, restriction);
    if (children.size() > eval_cap) {
        Rng rng(derive_seed(seed, "derive-subsample"));
        std::vector<std::size_t> order = rng.permutation(children.size());
        std::vector<Architecture> sample;
        sample.reserve(eval_cap);
        for (std::size_t i = 0; i < eval_cap; ++i) sample.push_back(children[order[i]]);
        std::sort(sample.begin(), sample.end());
        children = std::move(sample);
    }
    const Architecture* best = nullptr;
    double best_acc = -1.0;
    for (const Architecture& arch : children) {
        const EvalResult r = evaluate_child(weights, graph, arch, data, data.valid_idx);
        if (r.acc > best_acc) {
            best_acc = r.acc;
            best = &arch;
        }
    }
    return *best;
}

Restriction singleton_restriction(const CellGraph& graph, const Architecture& arch) {
    Restriction r;
    r.allowed.resize(graph.num_edges());
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        r.allowed[e] = {arch.choice[e]};
    }
    r.validate(graph);
    return r;
}

StandaloneResult train_standalone(const CellGraph& graph, const Architecture& arch,
                                  const Dataset& data, std::size_t epochs,
                                  const OptimizerConfig& optimizer, std::uint64_t seed) {
    StandaloneResult out;
    out.restriction = singleton_restriction(graph, arch);
    out.weights = SharedWeights::init(graph, out.restriction, seed);
    out.log = rsps_train(out.weights, graph, out.restriction, data, epochs, optimizer, seed);
    out.log.label = arch.encode();
    return out;
}

}  // namespace gmsplit
