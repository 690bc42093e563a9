#include "gmsplit/selection.hpp"

#include <algorithm>
#include <cmath>

namespace gmsplit {

const char* selection_criterion_name(SelectionCriterion c) {
    switch (c) {
        case SelectionCriterion::SuccessiveHalving: return "sh";
        case SelectionCriterion::ValidLoss: return "valid_loss";
        case SelectionCriterion::BestOfAll: return "best_of_all";
    }
    return "?";
}

std::optional<SelectionCriterion> selection_criterion_from_name(const std::string& name) {
    if (name == "sh") return SelectionCriterion::SuccessiveHalving;
    if (name == "valid_loss") return SelectionCriterion::ValidLoss;
    if (name == "best_of_all") return SelectionCriterion::BestOfAll;
    return std::nullopt;
}

void SHSchedule::validate(std::size_t num_candidates) const {
    if (checkpoints.empty()) throw ConfigError("sh schedule needs at least one checkpoint");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] == 0) throw ConfigError("sh checkpoints must be positive");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw ConfigError("sh checkpoints must be strictly increasing");
        }
    }
    std::size_t needed = 0;
    for (std::size_t pool = num_candidates; pool > 1; pool = (pool + 1) / 2) ++needed;
    if (checkpoints.size() < needed) {
        throw ConfigError("sh schedule has " + std::to_string(checkpoints.size()) +
                          " checkpoints; " + std::to_string(needed) + " needed for " +
                          std::to_string(num_candidates) + " candidates");
    }
}

SelectionReport successive_halving(ShCandidatePool& pool, const SHSchedule& schedule) {
    const std::size_t n = pool.size();
    if (n == 0) throw ConfigError("successive halving on an empty pool");
    schedule.validate(n);

    SelectionReport report;
    report.criterion = "sh";
    report.traces.resize(n);
    for (std::size_t i = 0; i < n; ++i) report.traces[i].id = pool.id(i);

    std::vector<std::size_t> alive(n);
    for (std::size_t i = 0; i < n; ++i) alive[i] = i;

    std::size_t epoch = 0;
    std::size_t next_ckpt = 0;
    // a singleton pool still trains to the first checkpoint
    while (alive.size() > 1 || (n == 1 && epoch < schedule.checkpoints[0])) {
        for (std::size_t i : alive) {
            pool.train_one_epoch(i);
            CandidateTrace& t = report.traces[i];
            ++t.epochs;
            t.valid_acc.push_back(pool.valid_accuracy(i));
            t.train_loss.push_back(pool.train_loss(i));
            ++report.total_epochs;
        }
        ++epoch;
        if (next_ckpt < schedule.checkpoints.size() && epoch == schedule.checkpoints[next_ckpt]) {
            ++next_ckpt;
            const std::size_t drop = alive.size() / 2;
            if (drop > 0) {
                std::vector<std::size_t> order = alive;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    const CandidateTrace& ta = report.traces[a];
                    const CandidateTrace& tb = report.traces[b];
                    if (ta.valid_acc.back() != tb.valid_acc.back()) {
                        return ta.valid_acc.back() > tb.valid_acc.back();
                    }
                    if (ta.train_loss.back() != tb.train_loss.back()) {
                        return ta.train_loss.back() < tb.train_loss.back();
                    }
                    return ta.id < tb.id;
                });
                order.resize(alive.size() - drop);
                std::sort(order.begin(), order.end());
                alive = std::move(order);
            }
        }
    }
    report.survivor_index = alive.front();
    report.traces[report.survivor_index].survived = true;
    return report;
}

namespace {

class TrainingPool final : public ShCandidatePool {
public:
    TrainingPool(const std::vector<Architecture>& candidates, const CellGraph& graph,
                 const Dataset& data, const OptimizerConfig& optimizer, std::size_t horizon,
                 std::uint64_t seed)
        : graph_(graph), data_(data), optimizer_(optimizer), horizon_(horizon) {
        for (const Architecture& arch : candidates) {
            Entry e;
            e.arch = arch;
            e.restriction = singleton_restriction(graph, arch);
            e.seed = derive_seed(seed, "sh:" + arch.encode());
            e.weights = SharedWeights::init(graph, e.restriction, e.seed);
            entries_.push_back(std::move(e));
        }
    }

    std::size_t size() const override { return entries_.size(); }

    void train_one_epoch(std::size_t i) override {
        Entry& e = entries_[i];
        e.last_train_loss = rsps_train_one_epoch(e.weights, graph_, e.restriction, data_, e.epoch,
                                                 horizon_, optimizer_, e.seed);
        ++e.epoch;
        e.last_valid_acc =
            evaluate_child(e.weights, graph_, e.arch, data_, data_.valid_idx).acc;
    }

    double valid_accuracy(std::size_t i) override { return entries_[i].last_valid_acc; }
    double train_loss(std::size_t i) override { return entries_[i].last_train_loss; }
    std::string id(std::size_t i) const override { return entries_[i].arch.encode(); }

private:
    struct Entry {
        Architecture arch;
        Restriction restriction;
        SharedWeights weights;
        std::uint64_t seed = 0;
        std::size_t epoch = 0;
        double last_train_loss = 0.0;
        double last_valid_acc = 0.0;
    };
    const CellGraph& graph_;
    const Dataset& data_;
    OptimizerConfig optimizer_;
    std::size_t horizon_;
    std::vector<Entry> entries_;
};

}  // namespace

SelectionReport successive_halving(const std::vector<Architecture>& candidates,
                                   const CellGraph& graph, const Dataset& data,
                                   const OptimizerConfig& optimizer, const SHSchedule& schedule,
                                   std::uint64_t seed) {
    schedule.validate(candidates.size());
    TrainingPool pool(candidates, graph, data, optimizer, schedule.checkpoints.back(), seed);
    return successive_halving(pool, schedule);
}

std::size_t sh_total_epochs(std::size_t num_candidates, const SHSchedule& schedule) {
    schedule.validate(num_candidates);
    if (num_candidates == 1) return schedule.checkpoints.front();
    std::size_t total = 0;
    std::size_t pool = num_candidates;
    std::size_t prev = 0;
    for (std::size_t ckpt : schedule.checkpoints) {
        if (pool <= 1) break;
        total += (ckpt - prev) * pool;
        prev = ckpt;
        pool = (pool + 1) / 2;  // drop floor(pool/2)
    }
    return total;
}

std::size_t select_by_valid_loss(const std::vector<TrainedSupernet>& leaves) {
    if (leaves.empty()) throw ConfigError("select_by_valid_loss on an empty leaf list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < leaves.size(); ++i) {
        if (leaves[i].final_valid_loss < leaves[best].final_valid_loss) best = i;
    }
    return best;
}

SelectionReport best_of_all(const std::vector<Architecture>& candidates, const CellGraph& graph,
                            const Dataset& data, std::size_t epochs,
                            const OptimizerConfig& optimizer, std::uint64_t seed) {
    if (candidates.empty()) throw ConfigError("best_of_all on an empty candidate list");
    SelectionReport report;
    report.criterion = "best_of_all";
    report.traces.resize(candidates.size());
    std::size_t best = 0;
    double best_acc = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const StandaloneResult r =
            train_standalone(graph, candidates[i], data, epochs, optimizer,
                             derive_seed(seed, "bestofall:" + candidates[i].encode()));
        CandidateTrace& t = report.traces[i];
        t.id = candidates[i].encode();
        t.epochs = epochs;
        t.valid_acc.push_back(r.log.final_valid_acc);
        t.train_loss.push_back(r.log.final_train_loss);
        report.total_epochs += epochs;
        const bool better = r.log.final_valid_acc > best_acc ||
                            (r.log.final_valid_acc == best_acc &&
                             candidates[i].choice < candidates[best].choice);
        if (better) {
            best = i;
            best_acc = r.log.final_valid_acc;
        }
    }
    report.survivor_index = best;
    report.traces[best].survived = true;
    return report;
}

}  // namespace gmsplit
