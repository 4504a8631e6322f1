#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "newsprop/ablation.hpp"
#include "newsprop/analysis.hpp"
#include "newsprop/errors.hpp"
#include "newsprop/gradcheck.hpp"
#include "newsprop/graph.hpp"
#include "newsprop/io.hpp"
#include "newsprop/model.hpp"
#include "newsprop/synth.hpp"
#include "newsprop/topo.hpp"
#include "newsprop/train.hpp"

namespace py = pybind11;
using namespace newsprop;

namespace {

std::vector<std::vector<double>> feature_rows(const PropagationGraph& g) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(g.num_nodes));
    if (g.feat_dim() == 0) return rows;
    for (int v = 0; v < g.num_nodes; ++v) {
        std::vector<double>& row = rows[static_cast<std::size_t>(v)];
        row.resize(g.feat_dim());
        for (std::size_t c = 0; c < g.feat_dim(); ++c)
            row[c] = g.features(static_cast<std::size_t>(v), c);
    }
    return rows;
}

PropagationGraph make_graph(std::string id, int num_nodes, std::vector<Edge> edges,
                            const std::vector<std::vector<double>>& features, int root,
                            int label) {
    PropagationGraph g;
    g.id = std::move(id);
    g.num_nodes = num_nodes;
    g.edges = std::move(edges);
    g.root = root;
    g.label = label;
    const std::size_t rows = features.size();
    const std::size_t cols = rows == 0 ? 0 : features.front().size();
    g.features = Tensor2D(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (features[r].size() != cols)
            throw DataError("ShapeMismatch", "ragged feature rows");
        for (std::size_t c = 0; c < cols; ++c) g.features(r, c) = features[r][c];
    }
    require_valid(g);
    return g;
}

Split parse_split(const std::string& name) {
    const auto split = split_from_name(name);
    if (!split) throw UsageError("BadSplit", "unknown split '" + name + "'");
    return *split;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Propagation-graph fake-news classification toolkit";

    py::register_exception<UsageError>(m, "UsageError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<CheckError>(m, "CheckError");

    py::class_<PropagationGraph>(m, "PropagationGraph")
        .def(py::init(&make_graph), py::arg("id"), py::arg("num_nodes"), py::arg("edges"),
             py::arg("features"), py::arg("root") = 0, py::arg("label") = 0)
        .def_readonly("id", &PropagationGraph::id)
        .def_readonly("num_nodes", &PropagationGraph::num_nodes)
        .def_readonly("root", &PropagationGraph::root)
        .def_readonly("label", &PropagationGraph::label)
        .def_readonly("edges", &PropagationGraph::edges)
        .def_property_readonly("feat_dim", &PropagationGraph::feat_dim)
        .def_property_readonly("num_edges", &PropagationGraph::num_edges)
        .def("features", &feature_rows);

    py::class_<GraphDataset>(m, "GraphDataset")
        .def_readonly("name", &GraphDataset::name)
        .def_readonly("graphs", &GraphDataset::graphs)
        .def_property_readonly("feat_dim", &GraphDataset::feat_dim)
        .def("has_splits", &GraphDataset::has_splits)
        .def("__len__", [](const GraphDataset& ds) { return ds.graphs.size(); });

    py::class_<TopoSummary>(m, "TopoSummary")
        .def_readonly("avg_degree", &TopoSummary::avg_degree)
        .def_readonly("mean_degree_centrality", &TopoSummary::mean_degree_centrality)
        .def_readonly("mean_clustering", &TopoSummary::mean_clustering)
        .def_readonly("density", &TopoSummary::density)
        .def_readonly("node_count", &TopoSummary::node_count)
        .def_readonly("label", &TopoSummary::label)
        .def_readonly("graph_id", &TopoSummary::graph_id);

    m.def("degree_centrality", &degree_centrality, py::arg("graph"));
    m.def("local_clustering", &local_clustering, py::arg("graph"));
    m.def("clustering_oracle", &clustering_oracle, py::arg("graph"));
    m.def("graph_density", &graph_density, py::arg("graph"));
    m.def("average_degree", &average_degree, py::arg("graph"));
    m.def("augment_features", &augment_features, py::arg("graph"));
    m.def("summarize", &summarize, py::arg("graph"));

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("graphs_per_class", &SynthConfig::graphs_per_class)
        .def_readwrite("min_nodes", &SynthConfig::min_nodes)
        .def_readwrite("max_nodes", &SynthConfig::max_nodes)
        .def_readwrite("feat_dim", &SynthConfig::feat_dim)
        .def_readwrite("structure_signal", &SynthConfig::structure_signal)
        .def_readwrite("feature_signal", &SynthConfig::feature_signal)
        .def_readwrite("base_closure", &SynthConfig::base_closure)
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("name", &SynthConfig::name);

    m.def("generate", &generate, py::arg("config"));
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    m.def("load_dataset", &load_dataset, py::arg("path"));

    m.def("randomize_edges", &randomize_edges, py::arg("graph"), py::arg("seed"));
    m.def("randomize_edges_preserve_degrees", &randomize_edges_preserve_degrees,
          py::arg("graph"), py::arg("seed"));
    m.def("gaussian_features", &gaussian_features, py::arg("graph"), py::arg("seed"));

    m.def(
        "report_json",
        [](const std::vector<TopoSummary>& summaries) {
            return report_to_json(build_report(summaries)).dump();
        },
        py::arg("summaries"), "Topology report for the summaries, as a JSON string.");

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_property(
            "model",
            [](const TrainConfig& c) { return model_kind_name(c.model_kind); },
            [](TrainConfig& c, const std::string& name) {
                c.model_kind = model_kind_from_name(name);
            })
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("dropout_rate", &TrainConfig::dropout_rate)
        .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
        .def_readwrite("concat_news", &TrainConfig::concat_news);

    py::class_<EpochLog>(m, "EpochLog")
        .def_readonly("epoch", &EpochLog::epoch)
        .def_readonly("train_loss", &EpochLog::train_loss)
        .def_readonly("val_accuracy", &EpochLog::val_accuracy)
        .def_readonly("val_macro_f1", &EpochLog::val_macro_f1)
        .def_readonly("val_auc", &EpochLog::val_auc);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("accuracy", &EvalReport::accuracy)
        .def_readonly("macro_f1", &EvalReport::macro_f1)
        .def_readonly("auc", &EvalReport::auc)
        .def_readonly("precision", &EvalReport::precision)
        .def_readonly("recall", &EvalReport::recall)
        .def_readonly("f1", &EvalReport::f1)
        .def_readonly("confusion", &EvalReport::confusion)
        .def_readonly("count", &EvalReport::count);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("epochs_done", &Checkpoint::epochs_done);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("best", &TrainResult::best)
        .def_readonly("last", &TrainResult::last)
        .def_readonly("log", &TrainResult::log)
        .def_readonly("best_epoch", &TrainResult::best_epoch);

    m.def("train", &train, py::arg("dataset"), py::arg("config"));
    m.def(
        "resume_training",
        [](const Checkpoint& last, const GraphDataset& ds, int extra_epochs) {
            return resume_training(last, ds, extra_epochs);
        },
        py::arg("last"), py::arg("dataset"), py::arg("extra_epochs"));
    m.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
    m.def(
        "evaluate_checkpoint",
        [](const Checkpoint& ckpt, const GraphDataset& ds, const std::string& split) {
            return evaluate_checkpoint(ckpt, ds, parse_split(split));
        },
        py::arg("checkpoint"), py::arg("dataset"), py::arg("split") = "test");

    py::class_<AblationReport>(m, "AblationReport")
        .def_readonly("accuracy_original", &AblationReport::accuracy_original)
        .def_readonly("accuracy_feature_only", &AblationReport::accuracy_feature_only)
        .def_readonly("accuracy_structure_only", &AblationReport::accuracy_structure_only)
        .def_readonly("degradation_structure", &AblationReport::degradation_structure)
        .def_readonly("degradation_features", &AblationReport::degradation_features)
        .def_readonly("seed", &AblationReport::seed)
        .def_readonly("dataset", &AblationReport::dataset);

    m.def("run_ablation", &run_ablation, py::arg("dataset"), py::arg("config"),
          py::arg("preserve_degrees") = false);

    py::class_<GradCheckReport>(m, "GradCheckReport")
        .def_readonly("passed", &GradCheckReport::passed)
        .def_readonly("samples", &GradCheckReport::samples)
        .def_readonly("skipped", &GradCheckReport::skipped)
        .def_readonly("worst_rel_err", &GradCheckReport::worst_rel_err)
        .def_readonly("worst_param", &GradCheckReport::worst_param);

    py::class_<GradCheckCase>(m, "GradCheckCase")
        .def_readonly("name", &GradCheckCase::name)
        .def_readonly("report", &GradCheckCase::report);

    m.def("run_standard_grad_checks", &run_standard_grad_checks, py::arg("seed") = 0,
          py::arg("epsilon") = 1e-5, py::arg("tolerance") = 1e-4,
          py::arg("max_samples") = 100);

    m.def("mix_seed", &mix_seed, py::arg("seed"), py::arg("stream"));
}
