#include "gmsplit/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace gmsplit {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& value) {
    // accepts "a, b, c" and "[a, b, c]"
    std::string body = trim(value);
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw ConfigError("unterminated list: " + value);
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(body);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// tracks which keys were consumed so typos surface as errors
class Section {
public:
    Section(std::string name, const std::map<std::string, std::string>* values,
            std::vector<std::string>* defaults_log)
        : name_(std::move(name)), values_(values), defaults_log_(defaults_log) {}

    bool has(const std::string& key) {
        if (!values_) return false;
        const bool present = values_->count(key) > 0;
        if (present) used_.insert(key);
        return present;
    }

    std::string raw(const std::string& key) {
        used_.insert(key);
        return values_->at(key);
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            note_default(key, fallback);
            return fallback;
        }
        return raw(key);
    }

    template <typename T>
    T get_number(const std::string& key, T fallback) {
        if (!has(key)) {
            std::ostringstream os;
            os << fallback;
            note_default(key, os.str());
            return fallback;
        }
        return parse_number<T>(key, raw(key));
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) {
            note_default(key, fallback ? "true" : "false");
            return fallback;
        }
        const std::string v = raw(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(path(key) + ": expected a boolean, got '" + v + "'");
    }

    template <typename T>
    T parse_number(const std::string& key, const std::string& text) const {
        std::stringstream ss(trim(text));
        T out{};
        ss >> out;
        const bool failed = ss.fail();
        std::string rest;
        if (!failed) ss >> rest;
        if (failed || !rest.empty()) {
            throw ConfigError(path(key) + ": cannot parse '" + text + "'");
        }
        return out;
    }

    std::string path(const std::string& key) const { return "[" + name_ + "] " + key; }

    void finish() const {
        if (!values_) return;
        for (const auto& [key, value] : *values_) {
            if (!used_.count(key)) {
                throw ConfigError("unknown key " + path(key));
            }
        }
    }

private:
    void note_default(const std::string& key, const std::string& value) {
        if (defaults_log_) defaults_log_->push_back(path(key) + " defaulted to " + value);
    }

    std::string name_;
    const std::map<std::string, std::string>* values_;
    std::vector<std::string>* defaults_log_;
    std::set<std::string> used_;
};

CellGraph parse_space(Section& sec) {
    CellGraph g;
    g.num_nodes = sec.get_number<int>("nodes", 3);
    g.feature_dim = sec.get_number<std::size_t>("feature_dim", 8);
    g.num_classes = sec.get_number<int>("classes", 3);

    std::vector<std::pair<int, int>> edge_pairs;
    for (const std::string& item : split_list(sec.get_string("edges", "0-1, 0-2, 1-2"))) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            throw ConfigError(sec.path("edges") + ": expected from-to, got '" + item + "'");
        }
        edge_pairs.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    }

    auto parse_ops = [&sec](const std::string& key, const std::string& value) {
        std::vector<OpKind> ops;
        for (const std::string& name : split_list(value)) {
            const auto kind = op_from_name(name);
            if (!kind) throw ConfigError(sec.path(key) + ": unknown op '" + name + "'");
            ops.push_back(*kind);
        }
        return ops;
    };
    const std::vector<OpKind> default_ops =
        parse_ops("ops", sec.get_string("ops", "zero, skip, linear_tanh, linear_relu"));

    for (std::size_t e = 0; e < edge_pairs.size(); ++e) {
        CellEdge edge;
        edge.from = edge_pairs[e].first;
        edge.to = edge_pairs[e].second;
        const std::string per_edge_key = "ops[" + std::to_string(e) + "]";
        edge.ops = sec.has(per_edge_key) ? parse_ops(per_edge_key, sec.raw(per_edge_key))
                                         : default_ops;
        g.edges.push_back(std::move(edge));
    }
    g.validate();
    return g;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    static const std::set<std::string> kSections = {"space", "train", "split", "experiment"};
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string current;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
            }
            current = trim(line.substr(1, line.size() - 2));
            if (!kSections.count(current)) {
                throw ConfigError("unknown section [" + current + "]");
            }
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        if (current.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key before any section");
        }
        const std::string key = trim(line.substr(0, eq));
        if (sections[current].count(key)) {
            throw ConfigError("duplicate key [" + current + "] " + key);
        }
        sections[current][key] = trim(line.substr(eq + 1));
    }

    RunConfig cfg;
    cfg.raw = sections;
    auto section_of = [&sections](const std::string& name) -> const std::map<std::string, std::string>* {
        const auto it = sections.find(name);
        return it == sections.end() ? nullptr : &it->second;
    };

    {
        Section sec("space", section_of("space"), &cfg.defaults_log);
        cfg.space = parse_space(sec);
        sec.finish();
    }
    {
        Section sec("train", section_of("train"), &cfg.defaults_log);
        const std::string method = sec.get_string("method", "rsps");
        const auto m = search_method_from_name(method);
        if (!m) throw ConfigError(sec.path("method") + ": unknown method '" + method + "'");
        cfg.search.method = *m;
        cfg.search.epochs = sec.get_number<std::size_t>("epochs", 30);
        cfg.search.optimizer.learning_rate = sec.get_number<double>("learning_rate", 0.2);
        cfg.search.optimizer.momentum = sec.get_number<double>("momentum", 0.9);
        cfg.search.optimizer.weight_decay = sec.get_number<double>("weight_decay", 1e-4);
        cfg.search.optimizer.batch_size = sec.get_number<std::size_t>("batch_size", 16);
        const std::string sched = sec.get_string("schedule", "cosine");
        if (sched == "cosine") {
            cfg.search.optimizer.schedule = LrSchedule::Cosine;
        } else if (sched == "constant") {
            cfg.search.optimizer.schedule = LrSchedule::Constant;
        } else {
            throw ConfigError(sec.path("schedule") + ": expected constant or cosine");
        }
        cfg.search.arch_lr = sec.get_number<double>("arch_lr", 0.05);
        cfg.search.seed = sec.get_number<std::uint64_t>("seed", 0);
        sec.finish();
    }
    {
        Section sec("split", section_of("split"), &cfg.defaults_log);
        cfg.search.num_splits = sec.get_number<std::size_t>("num_splits", 0);
        if (sec.has("branch_factors")) {
            for (const std::string& item : split_list(sec.raw("branch_factors"))) {
                cfg.search.branch_factors.push_back(
                    sec.parse_number<int>("branch_factors", item));
            }
        } else {
            cfg.search.branch_factors.assign(cfg.search.num_splits, 2);
            if (cfg.search.num_splits > 0) {
                cfg.defaults_log.push_back("[split] branch_factors defaulted to B = 2 per split");
            }
        }
        cfg.search.warm_epo = sec.get_number<std::size_t>("warm_epo", 5);
        cfg.search.gm_batches = sec.get_number<std::size_t>("gm_batches", 8);
        const std::string sim = sec.get_string("similarity", "cosine");
        const auto s = similarity_from_name(sim);
        if (!s) throw ConfigError(sec.path("similarity") + ": unknown measure '" + sim + "'");
        cfg.search.similarity = *s;
        const std::string schema = sec.get_string("schema", "gm");
        const auto sch = split_schema_from_name(schema);
        if (!sch) throw ConfigError(sec.path("schema") + ": unknown schema '" + schema + "'");
        cfg.pipeline.schema = *sch;
        cfg.pipeline.restart = sec.get_bool("restart", true);
        cfg.pipeline.derive_cap = sec.get_number<std::size_t>("derive_cap", 256);
        cfg.score_per_batch = sec.get_bool("score_per_batch", false);
        const std::string selection = sec.get_string("selection", "best_of_all");
        const auto crit = selection_criterion_from_name(selection);
        if (!crit) throw ConfigError(sec.path("selection") + ": unknown criterion '" + selection + "'");
        cfg.selection = *crit;
        if (sec.has("sh_checkpoints")) {
            cfg.sh_schedule.checkpoints.clear();
            for (const std::string& item : split_list(sec.raw("sh_checkpoints"))) {
                cfg.sh_schedule.checkpoints.push_back(
                    sec.parse_number<std::size_t>("sh_checkpoints", item));
            }
        }
        cfg.selection_epochs = sec.get_number<std::size_t>("selection_epochs", 40);
        sec.finish();
    }
    {
        Section sec("experiment", section_of("experiment"), &cfg.defaults_log);
        ExperimentConfig& ex = cfg.experiment;
        ex.dataset_seed = sec.get_number<std::uint64_t>("dataset_seed", 7);
        ex.n_per_class = sec.get_number<std::size_t>("n_per_class", 100);
        ex.noise_std = sec.get_number<double>("noise_std", 0.15);
        ex.oracle_epochs = sec.get_number<std::size_t>("oracle_epochs", 40);
        ex.oracle_seeds = sec.get_number<std::size_t>("oracle_seeds", 2);
        const std::string rank_schema = sec.get_string("rank_schema", "gm");
        const auto rs = rank_schema_from_name(rank_schema);
        if (!rs) throw ConfigError(sec.path("rank_schema") + ": unknown schema '" + rank_schema + "'");
        ex.rank_schema = *rs;
        ex.rank_budget = sec.get_number<std::size_t>("rank_budget", 4);
        ex.rank_seeds = sec.get_number<std::size_t>("rank_seeds", 5);
        if (sec.has("rank_cuts")) {
            ex.rank_cuts.clear();
            for (const std::string& item : split_list(sec.raw("rank_cuts"))) {
                ex.rank_cuts.push_back(sec.parse_number<double>("rank_cuts", item));
            }
        }
        ex.triples = sec.get_number<std::size_t>("triples", 20);
        ex.tau_sim = sec.get_number<double>("tau_sim", 0.7);
        ex.tau_dissim = sec.get_number<double>("tau_dissim", 0.3);
        ex.triple_warmup = sec.get_number<std::size_t>("triple_warmup", 2);
        ex.triple_epochs = sec.get_number<std::size_t>("triple_epochs", 15);
        ex.triple_sim_batches = sec.get_number<std::size_t>("triple_sim_batches", 16);
        ex.triple_retries = sec.get_number<std::size_t>("triple_retries", 8);
        if (sec.has("sweep_ts")) {
            ex.sweep_ts.clear();
            for (const std::string& item : split_list(sec.raw("sweep_ts"))) {
                ex.sweep_ts.push_back(sec.parse_number<std::size_t>("sweep_ts", item));
            }
        }
        ex.sweep_b = sec.get_number<int>("sweep_b", 2);
        ex.sweep_seeds = sec.get_number<std::size_t>("sweep_seeds", 5);
        sec.finish();
    }

    // cross-field constraints surface here, not at run time
    cfg.search.validate(cfg.space);
    cfg.sh_schedule.validate(1);
    if (cfg.search.optimizer.batch_size >
        (cfg.experiment.n_per_class * static_cast<std::size_t>(cfg.space.num_classes) * 8) / 10) {
        throw ConfigError("[train] batch_size exceeds the train split size");
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Dataset RunConfig::make_dataset() const {
    return make_spiral_dataset(experiment.dataset_seed, experiment.n_per_class, space.num_classes,
                               experiment.noise_std);
}

}  // namespace gmsplit
