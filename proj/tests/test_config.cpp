#include <doctest.h>

#include "gmsplit/config.hpp"
#include "gmsplit/manifest.hpp"

using namespace gmsplit;

namespace {

const char* kFullConfig = R"(
# toy search space and a two-split gm run
[space]
nodes = 3
edges = 0-1, 0-2, 1-2
ops = zero, skip, linear_tanh, linear_relu
feature_dim = 8
classes = 3

[train]
method = rsps
epochs = 30
learning_rate = 0.1
momentum = 0.9
weight_decay = 1e-4
batch_size = 16
schedule = cosine
arch_lr = 0.05
seed = 0

[split]
num_splits = 2
branch_factors = [2, 2]
warm_epo = 5
gm_batches = 8
similarity = cosine
schema = gm
restart = true
selection = best_of_all
sh_checkpoints = [5, 15, 40]
selection_epochs = 40

[experiment]
dataset_seed = 7
n_per_class = 100
noise_std = 0.15
oracle_epochs = 40
oracle_seeds = 2
rank_schema = gm
rank_budget = 4
rank_seeds = 5
triples = 20
tau_sim = 0.7
tau_dissim = 0.3
)";

}  // namespace

TEST_CASE("full config parses and round-trips its values") {
    const RunConfig cfg = parse_config(kFullConfig);
    CHECK(cfg.space.num_nodes == 3);
    CHECK(cfg.space.num_edges() == 3);
    CHECK(cfg.space.edges[2].from == 1);
    CHECK(cfg.space.edges[2].to == 2);
    CHECK(cfg.space.edges[0].ops.size() == 4);
    CHECK(cfg.search.method == SearchMethod::Rsps);
    CHECK(cfg.search.epochs == 30);
    CHECK(cfg.search.optimizer.learning_rate == 0.1);
    CHECK(cfg.search.optimizer.weight_decay == 1e-4);
    CHECK(cfg.search.num_splits == 2);
    CHECK(cfg.search.branch_factors == std::vector<int>{2, 2});
    CHECK(cfg.search.warm_epo == 5);
    CHECK(cfg.search.gm_batches == 8);
    CHECK(cfg.search.similarity == Similarity::Cosine);
    CHECK(cfg.pipeline.schema == SplitSchema::Gm);
    CHECK(cfg.pipeline.restart);
    CHECK(cfg.selection == SelectionCriterion::BestOfAll);
    CHECK(cfg.sh_schedule.checkpoints == std::vector<std::size_t>{5, 15, 40});
    CHECK(cfg.experiment.dataset_seed == 7);
    CHECK(cfg.experiment.rank_budget == 4);
    CHECK(cfg.experiment.tau_sim == 0.7);
    // the raw snapshot preserves what was written
    CHECK(cfg.raw.at("train").at("epochs") == "30");
}

TEST_CASE("unknown keys and sections are hard errors") {
    CHECK_THROWS_AS(parse_config("[split]\nbranch_factorz = [2]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[train]\nepochs = 5\nepochs = 6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("stray = 1\n"), ConfigError);
    try {
        parse_config("[split]\nbranch_factorz = [2]\n");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[split]") != std::string::npos);
        CHECK(msg.find("branch_factorz") != std::string::npos);
    }
}

TEST_CASE("defaults are logged, not silent") {
    const RunConfig cfg = parse_config("[split]\n");
    CHECK(cfg.search.num_splits == 0);  // empty split section is plain one-shot
    CHECK_FALSE(cfg.defaults_log.empty());
    bool saw_epochs = false;
    for (const std::string& line : cfg.defaults_log) {
        if (line.find("[train] epochs") != std::string::npos) saw_epochs = true;
    }
    CHECK(saw_epochs);
}

TEST_CASE("constraint violations carry key paths") {
    // branch factor arity
    CHECK_THROWS_AS(parse_config("[split]\nnum_splits = 3\nbranch_factors = [2, 3]\n"),
                    ConfigError);
    // accepted when arities match
    CHECK_NOTHROW(parse_config("[split]\nnum_splits = 2\nbranch_factors = [2, 3]\n"));
    // B exceeding the smallest op set
    CHECK_THROWS_AS(parse_config("[split]\nnum_splits = 1\nbranch_factors = [5]\n"), ConfigError);
    // type mismatch
    CHECK_THROWS_AS(parse_config("[train]\nepochs = soon\n"), ConfigError);
    // batch size beyond the train split
    CHECK_THROWS_AS(parse_config("[train]\nbatch_size = 100000\n"), ConfigError);
}

TEST_CASE("per-edge op overrides") {
    const RunConfig cfg = parse_config(
        "[space]\nedges = 0-1, 0-2, 1-2\nops = zero, skip\nops[1] = zero, skip, linear_tanh\n");
    CHECK(cfg.space.edges[0].ops.size() == 2);
    CHECK(cfg.space.edges[1].ops.size() == 3);
    CHECK(cfg.space.edges[2].ops.size() == 2);
    CHECK_THROWS_AS(parse_config("[space]\nops = zero, zero\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[space]\nops = zero, warp\n"), ConfigError);
}

TEST_CASE("determinism hash ignores the timing block") {
    nlohmann::json a = {{"x", 1}, {"payload", {1, 2, 3}}};
    nlohmann::json b = a;
    a["timing"] = {{"wall_seconds", 1.5}};
    b["timing"] = {{"wall_seconds", 99.0}};
    a["determinism_hash"] = "stale";
    CHECK(determinism_hash(a) == determinism_hash(b));
    b["payload"].push_back(4);
    CHECK(determinism_hash(a) != determinism_hash(b));
}
