#include "gmsplit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gmsplit/parallel.hpp"
#include "gmsplit/stats.hpp"

namespace gmsplit {

const char* rank_schema_name(RankSchema s) {
    switch (s) {
        case RankSchema::OneShot: return "oneshot";
        case RankSchema::Exhaustive: return "exhaustive";
        case RankSchema::Random: return "random";
        case RankSchema::Gm: return "gm";
    }
    return "?";
}

std::optional<RankSchema> rank_schema_from_name(const std::string& name) {
    if (name == "oneshot") return RankSchema::OneShot;
    if (name == "exhaustive") return RankSchema::Exhaustive;
    if (name == "random") return RankSchema::Random;
    if (name == "gm") return RankSchema::Gm;
    return std::nullopt;
}

std::pair<std::size_t, std::vector<int>> plan_splits(RankSchema schema, std::size_t budget,
                                                     const CellGraph& graph) {
    if (budget == 0) throw ConfigError("budget must be positive");
    if (schema == RankSchema::OneShot) {
        if (budget != 1) {
            throw ConfigError("oneshot schema uses exactly one supernet, budget was " +
                              std::to_string(budget));
        }
        return {0, {}};
    }
    if (schema == RankSchema::Exhaustive) {
        const std::size_t k = graph.edges.front().ops.size();
        for (const auto& e : graph.edges) {
            if (e.ops.size() != k) {
                throw ConfigError("exhaustive budget planning needs a uniform op count per edge");
            }
        }
        std::size_t t = 0, leaves = 1;
        while (leaves < budget && t < graph.num_edges()) {
            leaves *= k;
            ++t;
        }
        if (leaves != budget) {
            throw ConfigError("budget " + std::to_string(budget) +
                              " infeasible for exhaustive split with " + std::to_string(k) +
                              " ops per edge");
        }
        std::vector<int> factors(t, static_cast<int>(k));
        return {t, factors};
    }
    // gm / random: B = 2 per split
    std::size_t t = 0, leaves = 1;
    while (leaves < budget && t < graph.num_edges()) {
        leaves *= 2;
        ++t;
    }
    if (leaves != budget) {
        throw ConfigError("budget " + std::to_string(budget) +
                          " infeasible for B = 2 splitting (needs a power of two)");
    }
    return {t, std::vector<int>(t, 2)};
}

FinalSelection select_final(SelectionCriterion criterion, const PipelineResult& pipeline,
                            const CellGraph& graph, const Dataset& data,
                            std::size_t selection_epochs, const SHSchedule& sh_schedule,
                            const OptimizerConfig& optimizer, std::uint64_t seed) {
    if (pipeline.derived.empty()) throw ConfigError("pipeline produced no candidates");
    FinalSelection out;
    switch (criterion) {
        case SelectionCriterion::ValidLoss: {
            out.leaf_index = select_by_valid_loss(pipeline.leaf_logs);
            out.arch = pipeline.derived[out.leaf_index];
            out.report.criterion = "valid_loss";
            out.report.survivor_index = out.leaf_index;
            for (std::size_t i = 0; i < pipeline.leaf_logs.size(); ++i) {
                CandidateTrace t;
                t.id = pipeline.leaf_logs[i].label;
                t.valid_acc.push_back(pipeline.leaf_logs[i].final_valid_acc);
                t.train_loss.push_back(pipeline.leaf_logs[i].final_valid_loss);
                t.survived = i == out.leaf_index;
                out.report.traces.push_back(std::move(t));
            }
            return out;
        }
        case SelectionCriterion::BestOfAll: {
            out.report = best_of_all(pipeline.derived, graph, data, selection_epochs, optimizer,
                                     derive_seed(seed, "selection"));
            out.leaf_index = out.report.survivor_index;
            out.arch = pipeline.derived[out.leaf_index];
            return out;
        }
        case SelectionCriterion::SuccessiveHalving: {
            out.report = successive_halving(pipeline.derived, graph, data, optimizer, sh_schedule,
                                            derive_seed(seed, "selection"));
            out.leaf_index = out.report.survivor_index;
            out.arch = pipeline.derived[out.leaf_index];
            return out;
        }
    }
    throw ConfigError("unknown selection criterion");
}

namespace {

SearchConfig plan_search_config(const SearchConfig& base, RankSchema schema, std::size_t budget,
                                const CellGraph& graph, std::uint64_t seed) {
    SearchConfig cfg = base;
    const auto [t, factors] = plan_splits(schema, budget, graph);
    cfg.num_splits = t;
    cfg.branch_factors = factors;
    cfg.seed = seed;
    return cfg;
}

SplitSchema pipeline_schema(RankSchema schema) {
    switch (schema) {
        case RankSchema::Exhaustive: return SplitSchema::Exhaustive;
        case RankSchema::Random: return SplitSchema::Random;
        default: return SplitSchema::Gm;  // oneshot performs no splits anyway
    }
}

}  // namespace

RankingReport ranking_experiment(const CellGraph& graph, const Dataset& data,
                                 const OracleTable& oracle, const RankingConfig& cfg,
                                 const SearchConfig& base, std::uint64_t seed, std::size_t jobs) {
    RankingReport report;
    report.method = rank_schema_name(cfg.schema);
    report.cuts = cfg.cuts;

    // oracle ranking, best first; ties resolved by encoding for determinism
    std::vector<std::size_t> oracle_order(oracle.entries.size());
    std::iota(oracle_order.begin(), oracle_order.end(), 0);
    std::sort(oracle_order.begin(), oracle_order.end(), [&](std::size_t a, std::size_t b) {
        if (oracle.entries[a].mean_valid_acc != oracle.entries[b].mean_valid_acc) {
            return oracle.entries[a].mean_valid_acc > oracle.entries[b].mean_valid_acc;
        }
        return oracle.entries[a].arch.choice < oracle.entries[b].arch.choice;
    });

    report.per_seed.resize(cfg.num_seeds);
    parallel_for(cfg.num_seeds, jobs, [&](std::size_t rep) {
        const std::uint64_t rep_seed = derive_seed(seed, "rank-rep", rep);
        const SearchConfig run_cfg =
            plan_search_config(base, cfg.schema, cfg.budget, graph, rep_seed);
        PipelineOptions options;
        options.schema = pipeline_schema(cfg.schema);
        const PipelineResult pipeline = run_pipeline(graph, data, run_cfg, options);

        RankingSeedResult result;
        result.seed = rep_seed;

        // estimated score of each architecture in the one leaf that owns it
        for (const SubSupernet& leaf : pipeline.leaves) {
            for (const Architecture& child : enumerate_children(graph, leaf.restriction)) {
                const std::string key = child.encode();
                if (result.estimates.count(key)) {
                    throw ConfigError("architecture " + key + " owned by more than one leaf");
                }
                result.estimates[key] =
                    evaluate_child(leaf.weights, graph, child, data, data.valid_idx).acc;
            }
        }
        for (const auto& entry : oracle.entries) {
            if (!result.estimates.count(entry.arch.encode())) {
                throw ConfigError("architecture " + entry.arch.encode() + " not owned by any leaf");
            }
        }

        for (double cut : cfg.cuts) {
            const std::size_t k = std::max<std::size_t>(
                2, static_cast<std::size_t>(cut * static_cast<double>(oracle.entries.size())));
            std::vector<double> oracle_acc, estimate;
            for (std::size_t i = 0; i < k && i < oracle_order.size(); ++i) {
                const OracleEntry& entry = oracle.entries[oracle_order[i]];
                oracle_acc.push_back(entry.mean_valid_acc);
                estimate.push_back(result.estimates.at(entry.arch.encode()));
            }
            result.rho.push_back(spearman(oracle_acc, estimate));
        }

        const FinalSelection selection =
            select_final(cfg.selection, pipeline, graph, data, cfg.selection_epochs,
                         cfg.sh_schedule, base.optimizer, rep_seed);
        result.selected_arch = selection.arch.encode();
        result.selected_oracle_acc = oracle.at(selection.arch).mean_valid_acc;

        if (rep == 0) {
            report.num_supernets = pipeline.leaves.size();
            report.num_splits = run_cfg.num_splits;
            report.branch_factors = run_cfg.branch_factors;
        }
        report.per_seed[rep] = std::move(result);
    });

    report.mean_rho.assign(cfg.cuts.size(), 0.0);
    std::vector<double> accs;
    for (const auto& r : report.per_seed) {
        for (std::size_t c = 0; c < r.rho.size(); ++c) report.mean_rho[c] += r.rho[c];
        accs.push_back(r.selected_oracle_acc);
    }
    for (double& v : report.mean_rho) v /= static_cast<double>(cfg.num_seeds);
    report.mean_selected_oracle_acc = mean(accs);
    return report;
}

namespace {

Restriction pair_restriction(const CellGraph& graph, const Architecture& a,
                             const Architecture& b) {
    Restriction r;
    r.allowed.resize(graph.num_edges());
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        r.allowed[e] = {a.choice[e]};
        if (b.choice[e] != a.choice[e]) r.allowed[e].push_back(b.choice[e]);
        std::sort(r.allowed[e].begin(), r.allowed[e].end());
    }
    r.validate(graph);
    return r;
}

// gradient of one member's loss w.r.t. the bundles both members share (common
// parametric ops plus the head), averaged over the batches
std::vector<double> shared_pair_gradient(SharedWeights& weights, const CellGraph& graph,
                                         const Restriction& restriction, const Architecture& member,
                                         const Architecture& a, const Architecture& b,
                                         const std::vector<Batch>& batches) {
    std::vector<double> sum;
    const EdgeWeights ew = one_hot_weights(restriction, member);
    for (const Batch& batch : batches) {
        cell_backward(weights, graph, restriction, ew, batch);
        std::vector<double> flat;
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            if (a.choice[e] != b.choice[e]) continue;
            if (const ParamBundle* bundle = weights.bundle(static_cast<int>(e), a.choice[e])) {
                for (const auto& p : bundle->params) {
                    flat.insert(flat.end(), p.grad.values().begin(), p.grad.values().end());
                }
            }
        }
        for (const auto& p : weights.head().params) {
            flat.insert(flat.end(), p.grad.values().begin(), p.grad.values().end());
        }
        if (sum.empty()) sum.assign(flat.size(), 0.0);
        for (std::size_t i = 0; i < flat.size(); ++i) sum[i] += flat[i];
    }
    for (double& v : sum) v /= static_cast<double>(batches.size());
    return sum;
}

double cosine_flat(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw DegenerateGradientError("pair gradient with zero norm at shared weights");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

PairTrainResult train_pair(const CellGraph& graph, const Architecture& a, const Architecture& b,
                           const Dataset& data, const PairConfig& cfg, std::uint64_t seed,
                           bool measure_only) {
    if (cfg.warmup_epochs > cfg.total_epochs) {
        throw ConfigError("pair warmup exceeds total epochs");
    }
    const Restriction restriction = pair_restriction(graph, a, b);
    SharedWeights weights = SharedWeights::init(graph, restriction, derive_seed(seed, "pair-store"));

    PairTrainResult out;
    const Architecture members[2] = {a, b};

    for (std::size_t epoch = 0; epoch < cfg.total_epochs; ++epoch) {
        if (epoch == cfg.warmup_epochs) {
            Rng sim_rng(derive_seed(seed, "pair-sim"));
            const std::vector<Batch> batches = sample_batches(
                data, data.train_idx, cfg.sim_batches, cfg.optimizer.batch_size, sim_rng);
            const std::vector<double> ga =
                shared_pair_gradient(weights, graph, restriction, a, a, b, batches);
            const std::vector<double> gb =
                shared_pair_gradient(weights, graph, restriction, b, a, b, batches);
            out.similarity = cosine_flat(ga, gb);
            if (measure_only) return out;
        }
        Rng batch_rng(derive_seed(seed, "pair-epoch", epoch));
        const std::vector<Batch> batches =
            epoch_batches(data, data.train_idx, cfg.optimizer.batch_size, batch_rng);
        double loss_sum[2] = {0.0, 0.0};
        std::size_t steps[2] = {0, 0};
        for (std::size_t step = 0; step < batches.size(); ++step) {
            const std::size_t m = step % 2;
            const Architecture& arch = members[m];
            const EdgeWeights ew = one_hot_weights(restriction, arch);
            loss_sum[m] += cell_backward(weights, graph, restriction, ew, batches[step]);
            ++steps[m];
            const double t = (static_cast<double>(epoch) +
                              static_cast<double>(step + 1) / static_cast<double>(batches.size())) /
                             static_cast<double>(cfg.total_epochs);
            for (std::size_t e = 0; e < graph.num_edges(); ++e) {
                if (ParamBundle* bundle = weights.bundle(static_cast<int>(e), arch.choice[e])) {
                    sgd_step(*bundle, cfg.optimizer, t);
                }
            }
            sgd_step(weights.head(), cfg.optimizer, t);
        }
        out.epoch_train_loss_a.push_back(steps[0] ? loss_sum[0] / static_cast<double>(steps[0]) : 0.0);
        out.epoch_train_loss_b.push_back(steps[1] ? loss_sum[1] / static_cast<double>(steps[1]) : 0.0);
    }
    if (cfg.warmup_epochs == cfg.total_epochs) {
        // measurement sits at the end of training in this degenerate setup
        Rng sim_rng(derive_seed(seed, "pair-sim"));
        const std::vector<Batch> batches = sample_batches(
            data, data.train_idx, cfg.sim_batches, cfg.optimizer.batch_size, sim_rng);
        const std::vector<double> ga =
            shared_pair_gradient(weights, graph, restriction, a, a, b, batches);
        const std::vector<double> gb =
            shared_pair_gradient(weights, graph, restriction, b, a, b, batches);
        out.similarity = cosine_flat(ga, gb);
        if (measure_only) return out;
    }

    const EvalResult train_eval = evaluate_child(weights, graph, a, data, data.train_idx);
    const EvalResult valid_eval = evaluate_child(weights, graph, a, data, data.valid_idx);
    out.final_train_loss_a = train_eval.loss;
    out.final_valid_loss_a = valid_eval.loss;
    out.final_valid_acc_a = valid_eval.acc;
    return out;
}

TripleExperimentReport triple_experiment(const CellGraph& graph, const Dataset& data,
                                         const TripleConfig& cfg, std::uint64_t seed,
                                         std::size_t jobs) {
    if (cfg.tau_sim <= cfg.tau_dissim) {
        throw ConfigError("tau_sim must exceed tau_dissim");
    }
    bool any_multi_op = false;
    for (const auto& e : graph.edges) any_multi_op |= e.ops.size() >= 3;
    if (!any_multi_op) {
        throw ConfigError("triple experiment needs an edge with at least three ops");
    }

    TripleExperimentReport report;
    report.triples.resize(cfg.n_triples);
    std::vector<std::vector<std::string>> notes(cfg.n_triples);

    parallel_for(cfg.n_triples, jobs, [&](std::size_t i) {
        const std::uint64_t triple_seed = derive_seed(seed, "triple", i);
        Rng rng(derive_seed(triple_seed, "sampling"));
        const Restriction full = Restriction::full(graph);

        double tau_sim = cfg.tau_sim;
        double tau_dissim = cfg.tau_dissim;
        std::size_t attempt = 0;
        while (true) {
            if (attempt > 0 && attempt % cfg.max_retries == 0) {
                tau_sim -= 0.05;
                tau_dissim += 0.05;
                if (tau_sim <= tau_dissim) {
                    throw ConfigError(
                        "triple " + std::to_string(i) +
                        ": no qualifying pair even at the minimum thresholds (tau_sim " +
                        std::to_string(tau_sim) + ", tau_dissim " + std::to_string(tau_dissim) +
                        ") after " + std::to_string(attempt) + " attempts");
                }
                notes[i].push_back("triple " + std::to_string(i) + ": thresholds relaxed to (" +
                                   std::to_string(tau_sim) + ", " + std::to_string(tau_dissim) +
                                   ")");
            }
            const Architecture anchor = sample_uniform_arch(graph, full, rng);
            // pick an edge with enough alternatives to host both variants
            std::vector<std::size_t> eligible;
            for (std::size_t e = 0; e < graph.num_edges(); ++e) {
                if (graph.edges[e].ops.size() >= 3) eligible.push_back(e);
            }
            const std::size_t edge = eligible[rng.next_below(eligible.size())];

            PairConfig scan_cfg;
            scan_cfg.warmup_epochs = cfg.warmup_epochs;
            scan_cfg.total_epochs = cfg.joint_epochs;
            scan_cfg.sim_batches = cfg.sim_batches;
            scan_cfg.optimizer = cfg.optimizer;

            struct Candidate {
                Architecture arch;
                double sim = 0.0;
                std::uint64_t seed = 0;
            };
            std::vector<Candidate> candidates;
            for (std::size_t o = 0; o < graph.edges[edge].ops.size(); ++o) {
                if (static_cast<int>(o) == anchor.choice[edge]) continue;
                Candidate c;
                c.arch = anchor;
                c.arch.choice[edge] = static_cast<int>(o);
                c.seed = derive_seed(triple_seed, "pair:" + c.arch.encode(), attempt);
                c.sim = train_pair(graph, anchor, c.arch, data, scan_cfg, c.seed, true).similarity;
                candidates.push_back(std::move(c));
            }
            const auto [lo_it, hi_it] = std::minmax_element(
                candidates.begin(), candidates.end(),
                [](const Candidate& x, const Candidate& y) { return x.sim < y.sim; });
            ++attempt;
            if (hi_it->sim <= tau_sim || lo_it->sim >= tau_dissim || hi_it == lo_it) continue;

            const PairTrainResult with_sim =
                train_pair(graph, anchor, hi_it->arch, data, scan_cfg, hi_it->seed);
            const PairTrainResult with_dissim =
                train_pair(graph, anchor, lo_it->arch, data, scan_cfg, lo_it->seed);

            TripleRecord rec;
            rec.arch = anchor.encode();
            rec.arch_sim = hi_it->arch.encode();
            rec.arch_dissim = lo_it->arch.encode();
            rec.edge = static_cast<int>(edge);
            rec.sim_similar = with_sim.similarity;
            rec.sim_dissimilar = with_dissim.similarity;
            rec.train_loss_with_sim = with_sim.final_train_loss_a;
            rec.valid_loss_with_sim = with_sim.final_valid_loss_a;
            rec.train_loss_with_dissim = with_dissim.final_train_loss_a;
            rec.valid_loss_with_dissim = with_dissim.final_valid_loss_a;
            rec.tau_sim_used = tau_sim;
            rec.tau_dissim_used = tau_dissim;
            report.triples[i] = std::move(rec);
            break;
        }
    });

    for (auto& n : notes) {
        report.notes.insert(report.notes.end(), n.begin(), n.end());
    }
    auto collect = [&](auto getter) {
        std::vector<double> v;
        for (const auto& t : report.triples) v.push_back(getter(t));
        return v;
    };
    const auto sims = collect([](const TripleRecord& t) { return t.sim_similar; });
    const auto dsims = collect([](const TripleRecord& t) { return t.sim_dissimilar; });
    const auto tl_sim = collect([](const TripleRecord& t) { return t.train_loss_with_sim; });
    const auto tl_dis = collect([](const TripleRecord& t) { return t.train_loss_with_dissim; });
    const auto vl_sim = collect([](const TripleRecord& t) { return t.valid_loss_with_sim; });
    const auto vl_dis = collect([](const TripleRecord& t) { return t.valid_loss_with_dissim; });
    report.mean_sim_similar = mean(sims);
    report.std_sim_similar = stddev(sims);
    report.mean_sim_dissimilar = mean(dsims);
    report.std_sim_dissimilar = stddev(dsims);
    report.mean_train_loss_sim = mean(tl_sim);
    report.std_train_loss_sim = stddev(tl_sim);
    report.mean_train_loss_dissim = mean(tl_dis);
    report.std_train_loss_dissim = stddev(tl_dis);
    report.mean_valid_loss_sim = mean(vl_sim);
    report.std_valid_loss_sim = stddev(vl_sim);
    report.mean_valid_loss_dissim = mean(vl_dis);
    report.std_valid_loss_dissim = stddev(vl_dis);
    return report;
}

std::vector<SweepPoint> split_count_sweep(const CellGraph& graph, const Dataset& data,
                                          const OracleTable& oracle, const SearchConfig& base,
                                          const SweepConfig& cfg, std::uint64_t seed,
                                          std::size_t jobs) {
    std::vector<std::size_t> ts = cfg.t_values;
    if (std::find(ts.begin(), ts.end(), 0u) == ts.end()) ts.insert(ts.begin(), 0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    std::vector<SweepPoint> out;
    for (std::size_t t : ts) {
        SweepPoint point;
        point.num_splits = t;
        point.per_seed_acc.resize(cfg.num_seeds);
        parallel_for(cfg.num_seeds, jobs, [&](std::size_t rep) {
            SearchConfig run_cfg = base;
            run_cfg.num_splits = t;
            run_cfg.branch_factors.assign(t, cfg.branch);
            run_cfg.seed = derive_seed(seed, "sweep-rep", rep);
            PipelineOptions options;
            options.schema = cfg.schema;
            const PipelineResult pipeline = run_pipeline(graph, data, run_cfg, options);
            const FinalSelection selection =
                select_final(cfg.selection, pipeline, graph, data, cfg.selection_epochs,
                             cfg.sh_schedule, base.optimizer, run_cfg.seed);
            point.per_seed_acc[rep] = oracle.at(selection.arch).mean_valid_acc;
        });
        point.mean_acc = mean(point.per_seed_acc);
        point.regret = oracle.best_acc() - point.mean_acc;
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace gmsplit
