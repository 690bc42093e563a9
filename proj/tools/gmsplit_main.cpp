#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "gmsplit/manifest.hpp"
#include "gmsplit/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissingDependency = 3;
constexpr int kExitRuntime = 4;

struct MissingDependency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t jobs = 1;
};

fs::path resolve_out(const CommonArgs& args) {
    std::string out = args.out_dir;
    if (out.empty()) {
        if (const char* env = std::getenv("GM_SPLITTER_OUT")) out = env;
    }
    if (out.empty()) {
        throw CLI::ValidationError("--out", "no output directory given and GM_SPLITTER_OUT unset");
    }
    fs::create_directories(out);
    return fs::path(out);
}

gmsplit::RunConfig load_config(CommonArgs& args) {
    if (args.config_path.empty()) {
        throw CLI::ValidationError("--config", "a config file is required");
    }
    gmsplit::RunConfig cfg = gmsplit::parse_config_file(args.config_path);
    if (args.seed_given) cfg.search.seed = args.seed;
    for (const std::string& line : cfg.defaults_log) std::cerr << "config: " << line << "\n";
    return cfg;
}

json timing_block(const std::chrono::steady_clock::time_point& t0,
                  const std::chrono::system_clock::time_point& wall0) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {{"started_unix",
             std::chrono::duration_cast<std::chrono::seconds>(wall0.time_since_epoch()).count()},
            {"wall_seconds", secs}};
}

gmsplit::OracleTable load_oracle_or_fail(const fs::path& out, const gmsplit::CellGraph& space) {
    const fs::path csv = out / "oracle.csv";
    const fs::path side = out / "oracle.json";
    if (!fs::exists(csv) || !fs::exists(side)) {
        throw MissingDependency("no oracle table in " + out.string() +
                                "; run the `oracle` subcommand first");
    }
    return gmsplit::load_oracle(csv.string(), side.string(), space);
}

void write_csv(const fs::path& path, const std::string& content) {
    gmsplit::write_text_file(path.string(), content);
}

int cmd_split(CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto wall0 = std::chrono::system_clock::now();
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const gmsplit::Dataset data = cfg.make_dataset();

    gmsplit::PipelineResult pipeline =
        gmsplit::run_pipeline(cfg.space, data, cfg.search, cfg.pipeline, args.jobs);
    for (const std::string& note : pipeline.notes) std::cerr << "note: " << note << "\n";

    const gmsplit::FinalSelection selection = gmsplit::select_final(
        cfg.selection, pipeline, cfg.space, data, cfg.selection_epochs, cfg.sh_schedule,
        cfg.search.optimizer, cfg.search.seed);

    json manifest = gmsplit::build_split_manifest(cfg, data, pipeline, selection, cfg.search.seed);
    manifest["determinism_hash"] = gmsplit::determinism_hash(manifest);
    manifest["timing"] = timing_block(t0, wall0);
    gmsplit::write_json_file(manifest, (out / "manifest.json").string());

    std::cout << "leaves: " << pipeline.leaves.size() << "\n";
    for (std::size_t i = 0; i < pipeline.leaves.size(); ++i) {
        std::cout << "  " << pipeline.leaves[i].label << "  derived " << pipeline.derived[i].encode()
                  << "  valid_acc " << pipeline.leaf_logs[i].final_valid_acc << "\n";
    }
    std::cout << "selected: " << selection.arch.encode() << " (criterion "
              << selection.report.criterion << ")\n";
    std::cout << "determinism_hash: " << manifest["determinism_hash"].get<std::string>() << "\n";
    std::cout << "manifest: " << (out / "manifest.json").string() << "\n";
    return 0;
}

int cmd_oracle(CommonArgs& args) {
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const gmsplit::Dataset data = cfg.make_dataset();

    gmsplit::OracleConfig ocfg;
    ocfg.epochs = cfg.experiment.oracle_epochs;
    ocfg.optimizer = cfg.search.optimizer;
    ocfg.num_seeds = cfg.experiment.oracle_seeds;
    const gmsplit::OracleTable table =
        gmsplit::build_oracle(cfg.space, data, ocfg, cfg.search.seed, args.jobs);
    gmsplit::save_oracle(table, (out / "oracle.csv").string(), (out / "oracle.json").string());

    std::cout << "oracle: " << table.entries.size() << " architectures, best acc "
              << table.best_acc() << ", spread " << table.accuracy_spread() << "\n";
    std::cout << "written: " << (out / "oracle.csv").string() << "\n";
    return 0;
}

int cmd_rank(CommonArgs& args) {
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const gmsplit::Dataset data = cfg.make_dataset();
    const gmsplit::OracleTable oracle = load_oracle_or_fail(out, cfg.space);

    gmsplit::RankingConfig rcfg;
    rcfg.schema = cfg.experiment.rank_schema;
    rcfg.budget = cfg.experiment.rank_budget;
    rcfg.num_seeds = cfg.experiment.rank_seeds;
    rcfg.cuts = cfg.experiment.rank_cuts;
    rcfg.selection = cfg.selection;
    rcfg.selection_epochs = cfg.selection_epochs;
    rcfg.sh_schedule = cfg.sh_schedule;

    const gmsplit::RankingReport report = gmsplit::ranking_experiment(
        cfg.space, data, oracle, rcfg, cfg.search, cfg.search.seed, args.jobs);

    const std::string stem = "rank_" + report.method;
    gmsplit::write_json_file(gmsplit::to_json(report), (out / (stem + ".json")).string());

    std::ostringstream csv;
    csv.precision(17);
    csv << "method,seed,cut,rho,selected_arch,selected_oracle_acc\n";
    for (const auto& s : report.per_seed) {
        for (std::size_t c = 0; c < report.cuts.size(); ++c) {
            csv << report.method << "," << s.seed << "," << report.cuts[c] << "," << s.rho[c]
                << "," << s.selected_arch << "," << s.selected_oracle_acc << "\n";
        }
    }
    write_csv(out / (stem + ".csv"), csv.str());

    std::cout << "schema " << report.method << ": " << report.num_supernets << " supernets, "
              << report.num_splits << " splits\n";
    for (std::size_t c = 0; c < report.cuts.size(); ++c) {
        std::cout << "  top " << report.cuts[c] * 100 << "%: mean rho " << report.mean_rho[c]
                  << "\n";
    }
    std::cout << "  mean selected oracle acc: " << report.mean_selected_oracle_acc << "\n";
    return 0;
}

int cmd_triples(CommonArgs& args) {
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const gmsplit::Dataset data = cfg.make_dataset();

    gmsplit::TripleConfig tcfg;
    tcfg.n_triples = cfg.experiment.triples;
    tcfg.tau_sim = cfg.experiment.tau_sim;
    tcfg.tau_dissim = cfg.experiment.tau_dissim;
    tcfg.warmup_epochs = cfg.experiment.triple_warmup;
    tcfg.joint_epochs = cfg.experiment.triple_epochs;
    tcfg.sim_batches = cfg.experiment.triple_sim_batches;
    tcfg.max_retries = cfg.experiment.triple_retries;
    tcfg.optimizer = cfg.search.optimizer;

    const gmsplit::TripleExperimentReport report =
        gmsplit::triple_experiment(cfg.space, data, tcfg, cfg.search.seed, args.jobs);
    for (const std::string& note : report.notes) std::cerr << "note: " << note << "\n";

    gmsplit::write_json_file(gmsplit::to_json(report), (out / "triples.json").string());
    std::ostringstream csv;
    csv.precision(17);
    csv << "arch,arch_sim,arch_dissim,edge,sim_similar,sim_dissimilar,train_loss_with_sim,"
           "valid_loss_with_sim,train_loss_with_dissim,valid_loss_with_dissim\n";
    for (const auto& t : report.triples) {
        csv << t.arch << "," << t.arch_sim << "," << t.arch_dissim << "," << t.edge << ","
            << t.sim_similar << "," << t.sim_dissimilar << "," << t.train_loss_with_sim << ","
            << t.valid_loss_with_sim << "," << t.train_loss_with_dissim << ","
            << t.valid_loss_with_dissim << "\n";
    }
    write_csv(out / "triples.csv", csv.str());

    std::cout << "triples: " << report.triples.size() << "\n";
    std::cout << "  grad similarity: " << report.mean_sim_similar << " +- "
              << report.std_sim_similar << " vs " << report.mean_sim_dissimilar << " +- "
              << report.std_sim_dissimilar << "\n";
    std::cout << "  valid loss:      " << report.mean_valid_loss_sim << " +- "
              << report.std_valid_loss_sim << " vs " << report.mean_valid_loss_dissim << " +- "
              << report.std_valid_loss_dissim << "\n";
    return 0;
}

int cmd_sweep_t(CommonArgs& args) {
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const gmsplit::Dataset data = cfg.make_dataset();
    const gmsplit::OracleTable oracle = load_oracle_or_fail(out, cfg.space);

    gmsplit::SweepConfig scfg;
    scfg.t_values = cfg.experiment.sweep_ts;
    scfg.branch = cfg.experiment.sweep_b;
    scfg.num_seeds = cfg.experiment.sweep_seeds;
    scfg.schema = cfg.pipeline.schema;
    scfg.selection = cfg.selection;
    scfg.selection_epochs = cfg.selection_epochs;
    scfg.sh_schedule = cfg.sh_schedule;

    const std::vector<gmsplit::SweepPoint> points =
        gmsplit::split_count_sweep(cfg.space, data, oracle, cfg.search, scfg, cfg.search.seed,
                                   args.jobs);

    gmsplit::write_json_file(gmsplit::to_json(points), (out / "sweep.json").string());
    std::ostringstream csv;
    csv.precision(17);
    csv << "num_splits,mean_acc,regret\n";
    for (const auto& p : points) csv << p.num_splits << "," << p.mean_acc << "," << p.regret << "\n";
    write_csv(out / "sweep.csv", csv.str());

    std::cout << "T sweep (oracle best " << oracle.best_acc() << "):\n";
    for (const auto& p : points) {
        std::cout << "  T=" << p.num_splits << "  mean acc " << p.mean_acc << "  regret "
                  << p.regret << "\n";
    }
    return 0;
}

int cmd_select(CommonArgs& args) {
    gmsplit::RunConfig cfg = load_config(args);
    const fs::path out = resolve_out(args);
    const fs::path manifest_path = out / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw MissingDependency("no manifest.json in " + out.string() +
                                "; run the `split` subcommand first");
    }
    const json manifest = gmsplit::read_json_file(manifest_path.string());
    const gmsplit::Dataset data = cfg.make_dataset();

    std::vector<gmsplit::Architecture> candidates;
    std::vector<gmsplit::TrainedSupernet> logs;
    for (const json& leaf : manifest.at("leaves")) {
        candidates.push_back(
            gmsplit::Architecture::decode(leaf.at("derived_arch").get<std::string>(), cfg.space));
        gmsplit::TrainedSupernet t;
        t.label = leaf.at("label").get<std::string>();
        t.final_valid_loss = leaf.at("training").at("final_valid_loss").get<double>();
        t.final_valid_acc = leaf.at("training").at("final_valid_acc").get<double>();
        logs.push_back(std::move(t));
    }

    gmsplit::SelectionReport report;
    std::size_t survivor = 0;
    switch (cfg.selection) {
        case gmsplit::SelectionCriterion::ValidLoss: {
            survivor = gmsplit::select_by_valid_loss(logs);
            report.criterion = "valid_loss";
            report.survivor_index = survivor;
            for (std::size_t i = 0; i < logs.size(); ++i) {
                gmsplit::CandidateTrace t;
                t.id = logs[i].label;
                t.valid_acc.push_back(logs[i].final_valid_acc);
                t.train_loss.push_back(logs[i].final_valid_loss);
                t.survived = i == survivor;
                report.traces.push_back(std::move(t));
            }
            break;
        }
        case gmsplit::SelectionCriterion::BestOfAll:
            report = gmsplit::best_of_all(candidates, cfg.space, data, cfg.selection_epochs,
                                          cfg.search.optimizer,
                                          gmsplit::derive_seed(cfg.search.seed, "selection"));
            survivor = report.survivor_index;
            break;
        case gmsplit::SelectionCriterion::SuccessiveHalving:
            report = gmsplit::successive_halving(candidates, cfg.space, data,
                                                 cfg.search.optimizer, cfg.sh_schedule,
                                                 gmsplit::derive_seed(cfg.search.seed, "selection"));
            survivor = report.survivor_index;
            break;
    }

    json out_json = gmsplit::to_json(report);
    out_json["selected_arch"] = candidates[survivor].encode();
    gmsplit::write_json_file(out_json, (out / "selection.json").string());
    std::cout << "selected: " << candidates[survivor].encode() << " (criterion "
              << report.criterion << ", total epochs " << report.total_epochs << ")\n";
    return 0;
}

int cmd_report(CommonArgs& args) {
    const fs::path out = resolve_out(args);
    bool rendered = false;
    std::ostringstream text;

    const fs::path manifest_path = out / "manifest.json";
    if (fs::exists(manifest_path)) {
        rendered = true;
        const json m = gmsplit::read_json_file(manifest_path.string());
        text << "== split run ==\n";
        text << "schema: " << m.at("schema").get<std::string>() << "  seed: " << m.at("seed")
             << "  leaves: " << m.at("leaves").size() << "\n";
        text << "determinism_hash: " << m.at("determinism_hash").get<std::string>() << "\n";
        text << "splits (level leaf edge cut_cost):\n";
        for (const json& s : m.at("tree").at("splits")) {
            text << "  " << s.at("level") << "  " << s.at("leaf").get<std::string>() << "  e"
                 << s.at("decision").at("edge") << "  ";
            if (s.at("decision").at("cut_cost").is_null()) {
                text << "n/a";
            } else {
                text << s.at("decision").at("cut_cost").get<double>();
            }
            text << "\n";
        }
        text << "leaves (label derived valid_acc):\n";
        std::vector<std::string> labels;
        std::vector<double> accs;
        for (const json& leaf : m.at("leaves")) {
            const double acc = leaf.at("training").at("final_valid_acc").get<double>();
            text << "  " << leaf.at("label").get<std::string>() << "  "
                 << leaf.at("derived_arch").get<std::string>() << "  " << acc << "\n";
            labels.push_back(leaf.at("label").get<std::string>());
            accs.push_back(acc);
        }
        text << "selected: " << m.at("selected_arch").get<std::string>() << "\n\n";
        gmsplit::write_text_file((out / "leaf_valid_acc.svg").string(),
                                 gmsplit::svg_bar_chart("leaf validation accuracy", labels, accs));
    }

    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("rank_", 0) == 0 && entry.path().extension() == ".json") {
            rendered = true;
            const json r = gmsplit::read_json_file(entry.path().string());
            text << "== ranking: " << r.at("method").get<std::string>() << " ==\n";
            text << "supernets: " << r.at("num_supernets") << "  splits: " << r.at("num_splits")
                 << "\n";
            const auto& cuts = r.at("cuts");
            const auto& rho = r.at("mean_rho");
            std::vector<std::string> labels;
            std::vector<double> values;
            for (std::size_t c = 0; c < cuts.size(); ++c) {
                text << "  top " << cuts[c].get<double>() * 100 << "%: mean rho "
                     << rho[c].get<double>() << "\n";
                labels.push_back("top " + std::to_string(static_cast<int>(cuts[c].get<double>() * 100)) + "%");
                values.push_back(rho[c].get<double>());
            }
            text << "  mean selected oracle acc: "
                 << r.at("mean_selected_oracle_acc").get<double>() << "\n\n";
            gmsplit::write_text_file(
                (out / ("rank_" + r.at("method").get<std::string>() + ".svg")).string(),
                gmsplit::svg_bar_chart("mean Spearman rho: " + r.at("method").get<std::string>(),
                                       labels, values));
        }
    }

    const fs::path triples_path = out / "triples.json";
    if (fs::exists(triples_path)) {
        rendered = true;
        const json t = gmsplit::read_json_file(triples_path.string());
        text << "== triples ==\n";
        text << "  sim pair:    grad sim " << t.at("mean_sim_similar").get<double>() << " +- "
             << t.at("std_sim_similar").get<double>() << ", valid loss "
             << t.at("mean_valid_loss_sim").get<double>() << "\n";
        text << "  dissim pair: grad sim " << t.at("mean_sim_dissimilar").get<double>() << " +- "
             << t.at("std_sim_dissimilar").get<double>() << ", valid loss "
             << t.at("mean_valid_loss_dissim").get<double>() << "\n\n";
    }

    const fs::path sweep_path = out / "sweep.json";
    if (fs::exists(sweep_path)) {
        rendered = true;
        const json s = gmsplit::read_json_file(sweep_path.string());
        text << "== split-count sweep ==\n";
        gmsplit::SvgSeries series;
        series.name = "mean oracle acc";
        for (const json& p : s) {
            text << "  T=" << p.at("num_splits") << "  mean acc " << p.at("mean_acc").get<double>()
                 << "  regret " << p.at("regret").get<double>() << "\n";
            series.xs.push_back(p.at("num_splits").get<double>());
            series.ys.push_back(p.at("mean_acc").get<double>());
        }
        text << "\n";
        gmsplit::write_text_file((out / "sweep_t.svg").string(),
                                 gmsplit::svg_line_chart("selected accuracy vs splits", {series}));
    }

    if (!rendered) {
        throw MissingDependency("nothing to report in " + out.string());
    }
    gmsplit::write_text_file((out / "report.txt").string(), text.str());
    std::cout << text.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weight-sharing supernet splitter: gradient-matching scores, balanced min-cut "
                 "partitions, and the evaluation harness around them"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&args](CLI::App* sub, bool needs_config) {
        if (needs_config) sub->add_option("--config", args.config_path, "config file");
        sub->add_option("--out", args.out_dir, "output directory (default: $GM_SPLITTER_OUT)");
        sub->add_option("--jobs", args.jobs, "parallel worker cap")->check(CLI::PositiveNumber);
        sub->add_option("--seed", args.seed, "seed override")
            ->each([&args](const std::string&) { args.seed_given = true; });
    };

    add_common(app.add_subcommand("split", "run the splitting pipeline and derive architectures"),
               true);
    add_common(app.add_subcommand("oracle", "train every child standalone into an oracle table"),
               true);
    add_common(app.add_subcommand("rank", "ranking-correlation experiment against the oracle"),
               true);
    add_common(app.add_subcommand("triples", "paired-training gradient-similarity experiment"),
               true);
    add_common(app.add_subcommand("sweep-t", "selected-architecture quality across split counts"),
               true);
    add_common(app.add_subcommand("select", "apply a selection criterion to a split manifest"),
               true);
    add_common(app.add_subcommand("report", "render tables and plots from stored results"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("split")) return cmd_split(args);
        if (app.got_subcommand("oracle")) return cmd_oracle(args);
        if (app.got_subcommand("rank")) return cmd_rank(args);
        if (app.got_subcommand("triples")) return cmd_triples(args);
        if (app.got_subcommand("sweep-t")) return cmd_sweep_t(args);
        if (app.got_subcommand("select")) return cmd_select(args);
        if (app.got_subcommand("report")) return cmd_report(args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gmsplit::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MissingDependency& e) {
        std::cerr << "error: missing-dependency: " << e.what() << "\n";
        return kExitMissingDependency;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
