#pragma once

#include <string>
#include <vector>

#include "gmsplit/partition.hpp"

namespace gmsplit {

enum class SelectionCriterion { SuccessiveHalving, ValidLoss, BestOfAll };

const char* selection_criterion_name(SelectionCriterion c);
std::optional<SelectionCriterion> selection_criterion_from_name(const std::string& name);

struct SHSchedule {
    std::vector<std::size_t> checkpoints;  // strictly increasing epochs

    // needs ceil(log2 N) checkpoints so the pool can reach one candidate
    void validate(std::size_t num_candidates) const;
};

struct CandidateTrace {
    std::string id;  // architecture encoding (or leaf label for valid_loss)
    std::vector<double> valid_acc;
    std::vector<double> train_loss;
    std::size_t epochs = 0;
    bool survived = false;
};

struct SelectionReport {
    std::string criterion;
    std::vector<CandidateTrace> traces;  // aligned with the input pool
    std::size_t survivor_index = 0;
    std::size_t total_epochs = 0;
};

// What successive halving needs from a candidate pool. The production pool
// trains real architectures; tests stub it to audit the schedule accounting.
class ShCandidatePool {
public:
    virtual ~ShCandidatePool() = default;
    virtual std::size_t size() const = 0;
    virtual void train_one_epoch(std::size_t i) = 0;
    virtual double valid_accuracy(std::size_t i) = 0;
    virtual double train_loss(std::size_t i) = 0;
    virtual std::string id(std::size_t i) const = 0;
};

// Train every surviving candidate one epoch at a time; at each checkpoint
// drop the bottom floor(|P|/2) by validation accuracy (ties: lower training
// loss survives, then the lexicographically smaller id). A checkpoint at
// epoch e triggers after e epochs of training per surviving candidate. A
// single-candidate pool trains to the first checkpoint.
SelectionReport successive_halving(ShCandidatePool& pool, const SHSchedule& schedule);

// Production pool: candidates trained standalone (no sharing) with per-arch
// derived seeds; the learning-rate horizon is the last checkpoint.
SelectionReport successive_halving(const std::vector<Architecture>& candidates,
                                   const CellGraph& graph, const Dataset& data,
                                   const OptimizerConfig& optimizer, const SHSchedule& schedule,
                                   std::uint64_t seed);

// Closed form of the epochs successive halving spends:
// sum over intervals of (epo_k - epo_{k-1}) * ceil(N / 2^(k-1)) while the
// pool still holds more than one candidate.
std::size_t sh_total_epochs(std::size_t num_candidates, const SHSchedule& schedule);

// argmin of final validation loss; ties go to the earlier leaf
std::size_t select_by_valid_loss(const std::vector<TrainedSupernet>& leaves);

// Train every candidate fully and keep the best validation accuracy (ties:
// lexicographically smaller architecture).
SelectionReport best_of_all(const std::vector<Architecture>& candidates, const CellGraph& graph,
                            const Dataset& data, std::size_t epochs,
                            const OptimizerConfig& optimizer, std::uint64_t seed);

}  // namespace gmsplit
