#pragma once

#include "gmsplit/oracle.hpp"
#include "gmsplit/selection.hpp"

namespace gmsplit {

enum class RankSchema { OneShot, Exhaustive, Random, Gm };

const char* rank_schema_name(RankSchema s);
std::optional<RankSchema> rank_schema_from_name(const std::string& name);

// Derive (num_splits, branch factors) so the schema lands exactly on `budget`
// leaf supernets: exhaustive multiplies by the op-set size per split, gm and
// random split with B = 2. Throws ConfigError when the budget is infeasible.
std::pair<std::size_t, std::vector<int>> plan_splits(RankSchema schema, std::size_t budget,
                                                     const CellGraph& graph);

// Run the configured criterion over a pipeline's per-leaf candidates.
struct FinalSelection {
    std::size_t leaf_index = 0;
    Architecture arch;
    SelectionReport report;
};

FinalSelection select_final(SelectionCriterion criterion, const PipelineResult& pipeline,
                            const CellGraph& graph, const Dataset& data,
                            std::size_t selection_epochs, const SHSchedule& sh_schedule,
                            const OptimizerConfig& optimizer, std::uint64_t seed);

struct RankingConfig {
    RankSchema schema = RankSchema::Gm;
    std::size_t budget = 4;
    std::size_t num_seeds = 5;
    std::vector<double> cuts = {0.10, 0.25, 0.50};  // applied to the oracle ranking
    SelectionCriterion selection = SelectionCriterion::BestOfAll;
    std::size_t selection_epochs = 40;
    SHSchedule sh_schedule{{5, 15, 40}};
};

struct RankingSeedResult {
    std::uint64_t seed = 0;
    std::vector<double> rho;  // one per cut
    std::string selected_arch;
    double selected_oracle_acc = 0.0;
    std::map<std::string, double> estimates;  // arch -> shared-weight valid acc
};

struct RankingReport {
    std::string method;
    std::size_t num_supernets = 0;
    std::size_t num_splits = 0;
    std::vector<int> branch_factors;
    std::vector<double> cuts;
    std::vector<RankingSeedResult> per_seed;
    std::vector<double> mean_rho;
    double mean_selected_oracle_acc = 0.0;
};

// Split under the schema at the matched leaf budget, train every leaf, score
// each architecture inside the leaf that owns it, then compare the estimated
// ordering with the oracle's inside top percentile slices.
RankingReport ranking_experiment(const CellGraph& graph, const Dataset& data,
                                 const OracleTable& oracle, const RankingConfig& cfg,
                                 const SearchConfig& base, std::uint64_t seed,
                                 std::size_t jobs = 1);

struct PairConfig {
    std::size_t warmup_epochs = 2;
    std::size_t total_epochs = 15;
    std::size_t sim_batches = 16;
    OptimizerConfig optimizer;
};

struct PairTrainResult {
    double similarity = 0.0;  // gradient cosine at shared weights after warmup
    double final_train_loss_a = 0.0;
    double final_valid_loss_a = 0.0;
    double final_valid_acc_a = 0.0;
    std::vector<double> epoch_train_loss_a;
    std::vector<double> epoch_train_loss_b;
};

// Joint training of two architectures in one shared store, alternating one
// minibatch per member (a first). Weights are shared exactly where the two
// pick the same op. After `warmup_epochs` the gradient cosine between the two
// members' averaged shared-weight gradients is recorded; `measure_only` stops
// there.
PairTrainResult train_pair(const CellGraph& graph, const Architecture& a, const Architecture& b,
                           const Dataset& data, const PairConfig& cfg, std::uint64_t seed,
                           bool measure_only = false);

struct TripleConfig {
    std::size_t n_triples = 20;
    double tau_sim = 0.7;
    double tau_dissim = 0.3;
    std::size_t warmup_epochs = 2;
    std::size_t joint_epochs = 15;
    std::size_t sim_batches = 16;
    std::size_t max_retries = 8;  // resamples per threshold level
    OptimizerConfig optimizer;
};

struct TripleRecord {
    std::string arch;
    std::string arch_sim;
    std::string arch_dissim;
    int edge = 0;
    double sim_similar = 0.0;
    double sim_dissimilar = 0.0;
    double train_loss_with_sim = 0.0;
    double valid_loss_with_sim = 0.0;
    double train_loss_with_dissim = 0.0;
    double valid_loss_with_dissim = 0.0;
    double tau_sim_used = 0.0;
    double tau_dissim_used = 0.0;
};

struct TripleExperimentReport {
    std::vector<TripleRecord> triples;
    double mean_sim_similar = 0.0, std_sim_similar = 0.0;
    double mean_sim_dissimilar = 0.0, std_sim_dissimilar = 0.0;
    double mean_train_loss_sim = 0.0, std_train_loss_sim = 0.0;
    double mean_train_loss_dissim = 0.0, std_train_loss_dissim = 0.0;
    double mean_valid_loss_sim = 0.0, std_valid_loss_sim = 0.0;
    double mean_valid_loss_dissim = 0.0, std_valid_loss_dissim = 0.0;
    std::vector<std::string> notes;  // threshold relaxations, one line each
};

// For each sampled architecture, find one single-edge variant with gradient
// cosine above tau_sim and one below tau_dissim (relaxing both by 0.05 steps
// when a level's retries run out), jointly train each pairing from identical
// fresh stores and record the anchor's losses.
TripleExperimentReport triple_experiment(const CellGraph& graph, const Dataset& data,
                                         const TripleConfig& cfg, std::uint64_t seed,
                                         std::size_t jobs = 1);

struct SweepConfig {
    std::vector<std::size_t> t_values;  // 0 is included automatically
    int branch = 2;
    std::size_t num_seeds = 5;
    SplitSchema schema = SplitSchema::Gm;
    SelectionCriterion selection = SelectionCriterion::BestOfAll;
    std::size_t selection_epochs = 40;
    SHSchedule sh_schedule{{5, 15, 40}};
};

struct SweepPoint {
    std::size_t num_splits = 0;
    std::vector<double> per_seed_acc;  // oracle accuracy of the selection
    double mean_acc = 0.0;
    double regret = 0.0;  // oracle best minus mean_acc
};

std::vector<SweepPoint> split_count_sweep(const CellGraph& graph, const Dataset& data,
                                          const OracleTable& oracle, const SearchConfig& base,
                                          const SweepConfig& cfg, std::uint64_t seed,
                                          std::size_t jobs = 1);

}  // namespace gmsplit
