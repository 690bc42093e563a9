#include "gmsplit/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gmsplit/parallel.hpp"
#include "gmsplit/stats.hpp"

namespace gmsplit {

void OracleTable::build_index() const {
    if (index_.size() == entries.size()) return;
    index_.clear();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        index_.emplace(entries[i].arch.encode(), i);
    }
}

const OracleEntry* OracleTable::find(const Architecture& arch) const {
    build_index();
    const auto it = index_.find(arch.encode());
    return it == index_.end() ? nullptr : &entries[it->second];
}

const OracleEntry& OracleTable::at(const Architecture& arch) const {
    if (const OracleEntry* e = find(arch)) return *e;
    throw ConfigError("architecture " + arch.encode() + " missing from oracle table");
}

double OracleTable::best_acc() const {
    double best = 0.0;
    for (const auto& e : entries) best = std::max(best, e.mean_valid_acc);
    return best;
}

double OracleTable::accuracy_spread() const {
    if (entries.empty()) return 0.0;
    double lo = entries.front().mean_valid_acc, hi = lo;
    for (const auto& e : entries) {
        lo = std::min(lo, e.mean_valid_acc);
        hi = std::max(hi, e.mean_valid_acc);
    }
    return hi - lo;
}

OracleTable build_oracle(const CellGraph& graph, const Dataset& data, const OracleConfig& cfg,
                         std::uint64_t seed, std::size_t jobs) {
    std::vector<Architecture> children = enumerate_children(graph, Restriction::full(graph));
    if (cfg.sample > 0 && cfg.sample < children.size()) {
        Rng rng(derive_seed(seed, "oracle-sample"));
        std::vector<std::size_t> order = rng.permutation(children.size());
        std::vector<Architecture> picked;
        picked.reserve(cfg.sample);
        for (std::size_t i = 0; i < cfg.sample; ++i) picked.push_back(children[order[i]]);
        std::sort(picked.begin(), picked.end());
        children = std::move(picked);
    } else if (children.size() > cfg.max_children) {
        throw ConfigError("space holds " + std::to_string(children.size()) +
                          " children; pass an explicit sample size beyond " +
                          std::to_string(cfg.max_children));
    }

    OracleTable table;
    table.epochs = cfg.epochs;
    table.space_hash = graph.space_hash();
    for (std::size_t k = 0; k < cfg.num_seeds; ++k) {
        table.seeds.push_back(derive_seed(seed, "oracle-rep", k));
    }
    table.entries.resize(children.size());

    parallel_for(children.size(), jobs, [&](std::size_t i) {
        OracleEntry entry;
        entry.arch = children[i];
        for (std::uint64_t rep_seed : table.seeds) {
            const std::uint64_t train_seed =
                derive_seed(rep_seed, "oracle:" + entry.arch.encode());
            const StandaloneResult r =
                train_standalone(graph, entry.arch, data, cfg.epochs, cfg.optimizer, train_seed);
            entry.per_seed_acc.push_back(r.log.final_valid_acc);
            entry.per_seed_loss.push_back(r.log.final_train_loss);
        }
        entry.mean_valid_acc = mean(entry.per_seed_acc);
        entry.mean_train_loss = mean(entry.per_seed_loss);
        table.entries[i] = std::move(entry);
    });
    return table;
}

void save_oracle(const OracleTable& table, const std::string& csv_path,
                 const std::string& json_path) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write " + csv_path);
    csv << "arch,seed,valid_acc,train_loss\n";
    csv.precision(17);
    for (const auto& e : table.entries) {
        for (std::size_t k = 0; k < e.per_seed_acc.size(); ++k) {
            csv << e.arch.encode() << "," << k << "," << e.per_seed_acc[k] << ","
                << e.per_seed_loss[k] << "\n";
        }
    }

    nlohmann::json side;
    side["space_hash"] = table.space_hash;
    side["epochs"] = table.epochs;
    side["seeds"] = table.seeds;
    side["num_archs"] = table.entries.size();
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw ConfigError("cannot write " + json_path);
    js << side.dump(2) << "\n";
}

OracleTable load_oracle(const std::string& csv_path, const std::string& json_path,
                        const CellGraph& graph) {
    std::ifstream js(json_path);
    if (!js) throw ConfigError("cannot read " + json_path);
    nlohmann::json side = nlohmann::json::parse(js);

    OracleTable table;
    table.space_hash = side.at("space_hash").get<std::uint64_t>();
    table.epochs = side.at("epochs").get<std::size_t>();
    table.seeds = side.at("seeds").get<std::vector<std::uint64_t>>();
    if (table.space_hash != graph.space_hash()) {
        throw ConfigError("oracle table was built for a different space");
    }

    std::ifstream csv(csv_path);
    if (!csv) throw ConfigError("cannot read " + csv_path);
    std::string line;
    std::getline(csv, line);  // header
    std::map<std::string, OracleEntry> by_arch;
    std::vector<std::string> order;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string arch_text, seed_text, acc_text, loss_text;
        std::getline(ss, arch_text, ',');
        std::getline(ss, seed_text, ',');
        std::getline(ss, acc_text, ',');
        std::getline(ss, loss_text, ',');
        auto [it, fresh] = by_arch.try_emplace(arch_text);
        if (fresh) {
            it->second.arch = Architecture::decode(arch_text, graph);
            order.push_back(arch_text);
        }
        it->second.per_seed_acc.push_back(std::stod(acc_text));
        it->second.per_seed_loss.push_back(std::stod(loss_text));
    }
    for (const std::string& key : order) {
        OracleEntry& e = by_arch.at(key);
        e.mean_valid_acc = mean(e.per_seed_acc);
        e.mean_train_loss = mean(e.per_seed_loss);
        table.entries.push_back(std::move(e));
    }
    return table;
}

}  // namespace gmsplit
