#include "gmsplit/manifest.hpp"

#include <fstream>
#include <sstream>

namespace gmsplit {

nlohmann::json to_json(const GMMatrix& gm) {
    return {{"edge", gm.edge},
            {"op_labels", gm.op_labels},
            {"scores", gm.scores},
            {"measure", similarity_name(gm.measure)},
            {"num_batches", gm.num_batches}};
}

nlohmann::json to_json(const SplitDecision& d) {
    nlohmann::json j{{"edge", d.edge}, {"groups", d.groups}};
    if (d.cut_cost) {
        j["cut_cost"] = *d.cut_cost;
    } else {
        j["cut_cost"] = nullptr;
    }
    j["gm"] = d.gm ? to_json(*d.gm) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const TrainedSupernet& t) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochStats& e : t.epoch_log) {
        epochs.push_back({{"train_loss", e.train_loss},
                          {"valid_loss", e.valid_loss},
                          {"valid_acc", e.valid_acc}});
    }
    return {{"label", t.label},
            {"epochs", epochs},
            {"final_train_loss", t.final_train_loss},
            {"final_valid_loss", t.final_valid_loss},
            {"final_valid_acc", t.final_valid_acc}};
}

nlohmann::json to_json(const SelectionReport& r) {
    nlohmann::json traces = nlohmann::json::array();
    for (const CandidateTrace& t : r.traces) {
        traces.push_back({{"id", t.id},
                          {"valid_acc", t.valid_acc},
                          {"train_loss", t.train_loss},
                          {"epochs", t.epochs},
                          {"survived", t.survived}});
    }
    return {{"criterion", r.criterion},
            {"traces", traces},
            {"survivor_index", r.survivor_index},
            {"total_epochs", r.total_epochs}};
}

nlohmann::json to_json(const PartitionSet& p) {
    nlohmann::json entries = nlohmann::json::array();
    for (const PartitionEntry& e : p.entries) {
        entries.push_back({{"edge", e.edge}, {"ops", e.ops}});
    }
    return entries;
}

nlohmann::json space_json(const CellGraph& graph) {
    nlohmann::json edges = nlohmann::json::array();
    for (const CellEdge& e : graph.edges) {
        nlohmann::json ops = nlohmann::json::array();
        for (OpKind k : e.ops) ops.push_back(op_name(k));
        edges.push_back({{"from", e.from}, {"to", e.to}, {"ops", ops}});
    }
    return {{"nodes", graph.num_nodes},
            {"edges", edges},
            {"feature_dim", graph.feature_dim},
            {"classes", graph.num_classes},
            {"space_hash", graph.space_hash()}};
}

nlohmann::json to_json(const RankingReport& r) {
    nlohmann::json per_seed = nlohmann::json::array();
    for (const RankingSeedResult& s : r.per_seed) {
        per_seed.push_back({{"seed", s.seed},
                            {"rho", s.rho},
                            {"selected_arch", s.selected_arch},
                            {"selected_oracle_acc", s.selected_oracle_acc},
                            {"estimates", s.estimates}});
    }
    return {{"method", r.method},
            {"num_supernets", r.num_supernets},
            {"num_splits", r.num_splits},
            {"branch_factors", r.branch_factors},
            {"cuts", r.cuts},
            {"per_seed", per_seed},
            {"mean_rho", r.mean_rho},
            {"mean_selected_oracle_acc", r.mean_selected_oracle_acc}};
}

nlohmann::json to_json(const TripleExperimentReport& r) {
    nlohmann::json triples = nlohmann::json::array();
    for (const TripleRecord& t : r.triples) {
        triples.push_back({{"arch", t.arch},
                           {"arch_sim", t.arch_sim},
                           {"arch_dissim", t.arch_dissim},
                           {"edge", t.edge},
                           {"sim_similar", t.sim_similar},
                           {"sim_dissimilar", t.sim_dissimilar},
                           {"train_loss_with_sim", t.train_loss_with_sim},
                           {"valid_loss_with_sim", t.valid_loss_with_sim},
                           {"train_loss_with_dissim", t.train_loss_with_dissim},
                           {"valid_loss_with_dissim", t.valid_loss_with_dissim},
                           {"tau_sim_used", t.tau_sim_used},
                           {"tau_dissim_used", t.tau_dissim_used}});
    }
    return {{"triples", triples},
            {"mean_sim_similar", r.mean_sim_similar},
            {"std_sim_similar", r.std_sim_similar},
            {"mean_sim_dissimilar", r.mean_sim_dissimilar},
            {"std_sim_dissimilar", r.std_sim_dissimilar},
            {"mean_train_loss_sim", r.mean_train_loss_sim},
            {"std_train_loss_sim", r.std_train_loss_sim},
            {"mean_train_loss_dissim", r.mean_train_loss_dissim},
            {"std_train_loss_dissim", r.std_train_loss_dissim},
            {"mean_valid_loss_sim", r.mean_valid_loss_sim},
            {"std_valid_loss_sim", r.std_valid_loss_sim},
            {"mean_valid_loss_dissim", r.mean_valid_loss_dissim},
            {"std_valid_loss_dissim", r.std_valid_loss_dissim},
            {"notes", r.notes}};
}

nlohmann::json to_json(const std::vector<SweepPoint>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepPoint& p : points) {
        arr.push_back({{"num_splits", p.num_splits},
                       {"per_seed_acc", p.per_seed_acc},
                       {"mean_acc", p.mean_acc},
                       {"regret", p.regret}});
    }
    return arr;
}

nlohmann::json build_split_manifest(const RunConfig& cfg, const Dataset& data,
                                    const PipelineResult& pipeline, const FinalSelection& selection,
                                    std::uint64_t seed) {
    nlohmann::json manifest;
    manifest["schema_version"] = kManifestSchemaVersion;
    manifest["config"] = cfg.raw;
    manifest["config_defaults"] = cfg.defaults_log;
    manifest["space"] = space_json(cfg.space);
    manifest["dataset"] = {{"seed", data.seed},
                           {"size", data.size()},
                           {"train", data.train_idx.size()},
                           {"valid", data.valid_idx.size()},
                           {"classes", data.num_classes}};
    manifest["seed"] = seed;
    manifest["schema"] = split_schema_name(cfg.pipeline.schema);
    manifest["restart"] = cfg.pipeline.restart;

    nlohmann::json splits = nlohmann::json::array();
    for (const SplitRecord& s : pipeline.tree.splits) {
        splits.push_back({{"level", s.level},
                          {"leaf", s.leaf_label},
                          {"schema", split_schema_name(s.schema)},
                          {"decision", to_json(s.decision)},
                          {"children", s.child_labels}});
    }
    manifest["tree"] = {{"splits", splits}, {"leaf_labels", pipeline.tree.leaf_labels}};

    nlohmann::json leaves = nlohmann::json::array();
    for (std::size_t i = 0; i < pipeline.leaves.size(); ++i) {
        leaves.push_back({{"label", pipeline.leaves[i].label},
                          {"partition", to_json(pipeline.leaves[i].partition)},
                          {"training", to_json(pipeline.leaf_logs[i])},
                          {"derived_arch", pipeline.derived[i].encode()}});
    }
    manifest["leaves"] = leaves;
    manifest["selection"] = to_json(selection.report);
    manifest["selected_arch"] = selection.arch.encode();
    manifest["selected_leaf"] = pipeline.leaves[selection.leaf_index].label;
    manifest["notes"] = pipeline.notes;
    return manifest;
}

std::string determinism_hash(const nlohmann::json& manifest) {
    nlohmann::json scrubbed = manifest;
    scrubbed.erase("timing");
    scrubbed.erase("determinism_hash");
    const std::string dump = scrubbed.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    return nlohmann::json::parse(in);
}

}  // namespace gmsplit
