#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmsplit/manifest.hpp"
#include "gmsplit/stats.hpp"

namespace py = pybind11;

namespace {

gmsplit::GMMatrix matrix_from_scores(const std::vector<std::vector<double>>& scores,
                                     const std::string& measure) {
    const auto m = gmsplit::similarity_from_name(measure);
    if (!m) throw gmsplit::ConfigError("unknown similarity measure '" + measure + "'");
    gmsplit::GMMatrix gm;
    gm.edge = 0;
    gm.measure = *m;
    gm.scores = scores;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        gm.op_labels.push_back("op" + std::to_string(i));
    }
    gm.validate();
    return gm;
}

}  // namespace

PYBIND11_MODULE(_gmsplit, m) {
    m.doc() = "supernet splitting via gradient-matching scores and balanced min-cut";

    py::register_exception<gmsplit::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<gmsplit::ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<gmsplit::StatsError>(m, "StatsError", PyExc_ValueError);

    m.def("spearman", &gmsplit::spearman, py::arg("xs"), py::arg("ys"),
          "Spearman rank correlation with average-rank tie handling.");

    m.def(
        "balanced_min_cut",
        [](const std::vector<std::vector<double>>& scores, int branching,
           const std::string& measure) {
            const gmsplit::SplitDecision d =
                gmsplit::balanced_min_cut(matrix_from_scores(scores, measure), branching);
            return py::make_tuple(d.groups, *d.cut_cost);
        },
        py::arg("scores"), py::arg("branching") = 2, py::arg("measure") = "cosine",
        "Brute-force balanced min-cut over a symmetric similarity matrix; "
        "returns (groups, cut_cost).");

    m.def(
        "sh_total_epochs",
        [](std::size_t candidates, const std::vector<std::size_t>& checkpoints) {
            return gmsplit::sh_total_epochs(candidates, gmsplit::SHSchedule{checkpoints});
        },
        py::arg("candidates"), py::arg("checkpoints"),
        "Closed-form epoch count of successive halving.");

    m.def(
        "spiral_dataset_summary",
        [](std::uint64_t seed, std::size_t n_per_class, int classes, double noise_std) {
            const gmsplit::Dataset d =
                gmsplit::make_spiral_dataset(seed, n_per_class, classes, noise_std);
            py::dict out;
            out["size"] = d.size();
            out["dim"] = d.dim();
            out["train"] = d.train_idx.size();
            out["valid"] = d.valid_idx.size();
            out["first_row"] = std::vector<double>(d.inputs.data(), d.inputs.data() + d.dim());
            return out;
        },
        py::arg("seed"), py::arg("n_per_class") = 100, py::arg("classes") = 3,
        py::arg("noise_std") = 0.15);

    m.def(
        "toy_space_children",
        [](const std::string& config_text) {
            const gmsplit::CellGraph graph = config_text.empty()
                                                 ? gmsplit::CellGraph::toy_space()
                                                 : gmsplit::parse_config(config_text).space;
            std::vector<std::string> out;
            for (const gmsplit::Architecture& a :
                 gmsplit::enumerate_children(graph, gmsplit::Restriction::full(graph))) {
                out.push_back(a.encode());
            }
            return out;
        },
        py::arg("config_text") = "",
        "Encodings of every child architecture of the configured space.");

    m.def(
        "check_config",
        [](const std::string& text) {
            const gmsplit::RunConfig cfg = gmsplit::parse_config(text);
            py::dict out;
            out["edges"] = cfg.space.num_edges();
            out["children"] = gmsplit::Restriction::full(cfg.space).num_children();
            out["num_splits"] = cfg.search.num_splits;
            out["schema"] = gmsplit::split_schema_name(cfg.pipeline.schema);
            out["defaults"] = cfg.defaults_log;
            return out;
        },
        py::arg("text"), "Validate a config and summarize what it describes.");

    m.def(
        "run_split",
        [](const std::string& config_text, std::uint64_t seed, std::size_t jobs) {
            gmsplit::RunConfig cfg = gmsplit::parse_config(config_text);
            cfg.search.seed = seed;
            const gmsplit::Dataset data = cfg.make_dataset();
            const gmsplit::PipelineResult pipeline =
                gmsplit::run_pipeline(cfg.space, data, cfg.search, cfg.pipeline, jobs);
            const gmsplit::FinalSelection selection = gmsplit::select_final(
                cfg.selection, pipeline, cfg.space, data, cfg.selection_epochs, cfg.sh_schedule,
                cfg.search.optimizer, cfg.search.seed);
            nlohmann::json manifest =
                gmsplit::build_split_manifest(cfg, data, pipeline, selection, cfg.search.seed);
            manifest["determinism_hash"] = gmsplit::determinism_hash(manifest);
            return manifest.dump(2);
        },
        py::arg("config_text"), py::arg("seed") = 0, py::arg("jobs") = 1,
        "Run the full splitting pipeline and return the manifest as JSON text.");
}
