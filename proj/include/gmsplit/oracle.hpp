#pragma once

#include <map>
#include <string>

#include "gmsplit/search.hpp"

namespace gmsplit {

struct OracleEntry {
    Architecture arch;
    std::vector<double> per_seed_acc;
    std::vector<double> per_seed_loss;
    double mean_valid_acc = 0.0;
    double mean_train_loss = 0.0;
};

// Ground truth: every child of the space trained standalone, accuracy
// averaged over the replication seeds. Entries follow child enumeration
// order.
struct OracleTable {
    std::vector<OracleEntry> entries;
    std::vector<std::uint64_t> seeds;
    std::size_t epochs = 0;
    std::uint64_t space_hash = 0;

    const OracleEntry* find(const Architecture& arch) const;
    const OracleEntry& at(const Architecture& arch) const;
    double best_acc() const;
    double accuracy_spread() const;  // max - min mean accuracy

private:
    mutable std::map<std::string, std::size_t> index_;
    void build_index() const;
};

struct OracleConfig {
    std::size_t epochs = 40;
    OptimizerConfig optimizer;
    std::size_t num_seeds = 2;
    std::size_t max_children = 4096;  // refuse to enumerate beyond this
    std::size_t sample = 0;           // 0: full enumeration, else seeded subsample
};

// Per-arch, per-replication seeds are derived from (seed, arch encoding), so
// the table does not depend on enumeration order or on sharing any stream.
OracleTable build_oracle(const CellGraph& graph, const Dataset& data, const OracleConfig& cfg,
                         std::uint64_t seed, std::size_t jobs = 1);

// CSV rows: arch, seed index, valid_acc, train_loss. A JSON sidecar carries
// the space hash and build settings.
void save_oracle(const OracleTable& table, const std::string& csv_path,
                 const std::string& json_path);
OracleTable load_oracle(const std::string& csv_path, const std::string& json_path,
                        const CellGraph& graph);

}  // namespace gmsplit
