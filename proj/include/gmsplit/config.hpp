#pragma once

#include <map>
#include <string>

#include "gmsplit/experiments.hpp"

namespace gmsplit {

struct ExperimentConfig {
    std::uint64_t dataset_seed = 7;
    std::size_t n_per_class = 100;
    double noise_std = 0.15;
    std::size_t oracle_epochs = 40;
    std::size_t oracle_seeds = 2;
    RankSchema rank_schema = RankSchema::Gm;
    std::size_t rank_budget = 4;
    std::size_t rank_seeds = 5;
    std::vector<double> rank_cuts = {0.10, 0.25, 0.50};
    std::size_t triples = 20;
    double tau_sim = 0.7;
    double tau_dissim = 0.3;
    std::size_t triple_warmup = 2;
    std::size_t triple_epochs = 15;
    std::size_t triple_sim_batches = 16;
    std::size_t triple_retries = 8;
    std::vector<std::size_t> sweep_ts = {1, 2};
    int sweep_b = 2;
    std::size_t sweep_seeds = 5;
};

struct RunConfig {
    CellGraph space;
    SearchConfig search;
    PipelineOptions pipeline;
    bool score_per_batch = false;
    SelectionCriterion selection = SelectionCriterion::BestOfAll;
    SHSchedule sh_schedule{{5, 15, 40}};
    std::size_t selection_epochs = 40;
    ExperimentConfig experiment;

    // verbatim key/value snapshot for the manifest
    std::map<std::string, std::map<std::string, std::string>> raw;
    // one line per omitted optional key that fell back to its default
    std::vector<std::string> defaults_log;

    Dataset make_dataset() const;
};

// Sections [space], [train], [split], [experiment]; '#' and ';' start
// comments. Unknown sections or keys are errors, never silent defaults.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace gmsplit
