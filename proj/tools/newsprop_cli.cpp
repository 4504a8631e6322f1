#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace {

using nlohmann::json;
using namespace newsprop;

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void emit_error(const std::string& code, const std::string& message) {
    json j;
    j["error"]["code"] = code;
    j["error"]["message"] = message;
    std::cerr << j.dump() << "\n";
}

constexpr std::array<const char*, 8> kCommands = {"gen",   "augment", "summarize", "analyze",
                                                  "train", "eval",    "ablate",    "gradcheck"};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      std::uint64_t& seed) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option_function<std::string>(
        "--config", [](const std::string&) {},
        "Read option defaults from a key=value file");
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    return cmd;
}

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("ConfigFile", "cannot read '" + path + "'");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        std::string key = eq == std::string::npos ? "" : trim(t.substr(0, eq));
        std::string value = eq == std::string::npos ? "" : trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("ConfigFile",
                             path + ":" + std::to_string(lineno) + ": expected key=value");
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        pairs.emplace_back(std::move(key), std::move(value));
    }
    return pairs;
}

// CLI11 reads config files only through the root app, so per-subcommand
// key=value files are merged into the token stream here. File values are
// appended as --key=value only when the flag was not given explicitly,
// which keeps the precedence CLI flag > config file > default.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::size_t cmd = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            if (std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end())
                cmd = i;
            break;
        }
    }
    if (cmd == args.size()) return args;

    std::string config_path;
    std::set<std::string> given;
    for (std::size_t i = cmd + 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        const auto eq = a.find('=');
        const std::string name = a.substr(0, eq == std::string::npos ? a.size() : eq);
        given.insert(name);
        if (name == "--config") {
            if (eq != std::string::npos)
                config_path = a.substr(eq + 1);
            else if (i + 1 < args.size())
                config_path = args[i + 1];
        }
    }
    if (config_path.empty()) return args;

    for (const auto& [key, value] : read_config_file(config_path)) {
        const std::string flag = "--" + key;
        if (given.count(flag) > 0) continue;
        args.push_back(flag + "=" + value);
    }
    return args;
}

// ---------------------------------------------------------------- gen

struct GenOpts {
    SynthConfig config;
    std::string out;
};

void run_gen(const GenOpts& o) {
    const GraphDataset ds = generate(o.config);
    save_dataset(ds, o.out);
    json j;
    j["command"] = "gen";
    j["out"] = o.out;
    j["name"] = ds.name;
    j["graphs"] = ds.graphs.size();
    j["feat_dim"] = ds.feat_dim();
    j["seed"] = o.config.seed;
    emit(j);
}

void add_gen(CLI::App& app) {
    auto o = std::make_shared<GenOpts>();
    CLI::App* cmd = add_command(app, "gen", "Generate a synthetic cascade dataset",
                                o->config.seed);
    cmd->add_option("--out", o->out, "Output dataset path")->required();
    cmd->add_option("--graphs", o->config.graphs_per_class, "Graphs per class")
        ->capture_default_str();
    cmd->add_option("--min-nodes", o->config.min_nodes, "Minimum nodes per graph")
        ->capture_default_str();
    cmd->add_option("--max-nodes", o->config.max_nodes, "Maximum nodes per graph")
        ->capture_default_str();
    cmd->add_option("--feat-dim", o->config.feat_dim, "Node feature width")
        ->capture_default_str();
    cmd->add_option("--structure-signal", o->config.structure_signal,
                    "Extra wedge-closure probability for the fake class")
        ->capture_default_str();
    cmd->add_option("--feature-signal", o->config.feature_signal,
                    "Mean shift on the first feature block for the fake class")
        ->capture_default_str();
    cmd->add_option("--base-closure", o->config.base_closure,
                    "Wedge-closure probability shared by both classes")
        ->capture_default_str();
    cmd->add_option("--name", o->config.name, "Dataset name stored in the header")
        ->capture_default_str();
    cmd->callback([o] { run_gen(*o); });
}

// ---------------------------------------------------------------- augment

struct PathOpts {
    std::string in;
    std::string out;
    std::uint64_t seed = 0;
};

void run_augment(const PathOpts& o) {
    GraphDataset ds = load_dataset(o.in);
    const std::size_t before = ds.feat_dim();
    for (PropagationGraph& g : ds.graphs) g = augment_features(g);
    save_dataset(ds, o.out);
    json j;
    j["command"] = "augment";
    j["in"] = o.in;
    j["out"] = o.out;
    j["graphs"] = ds.graphs.size();
    j["feat_dim_in"] = before;
    j["feat_dim_out"] = ds.feat_dim();
    emit(j);
}

void add_augment(CLI::App& app) {
    auto o = std::make_shared<PathOpts>();
    CLI::App* cmd = add_command(app, "augment",
                                "Append degree-centrality and clustering columns", o->seed);
    cmd->add_option("--in", o->in, "Input dataset path")->required();
    cmd->add_option("--out", o->out, "Output dataset path")->required();
    cmd->callback([o] { run_augment(*o); });
}

// ---------------------------------------------------------------- summarize

void run_summarize(const PathOpts& o) {
    const GraphDataset ds = load_dataset(o.in);
    std::vector<TopoSummary> rows;
    rows.reserve(ds.graphs.size());
    for (const PropagationGraph& g : ds.graphs) rows.push_back(summarize(g));
    write_summary_csv(rows, o.out);
    json j;
    j["command"] = "summarize";
    j["in"] = o.in;
    j["out"] = o.out;
    j["graphs"] = rows.size();
    emit(j);
}

void add_summarize(CLI::App& app) {
    auto o = std::make_shared<PathOpts>();
    CLI::App* cmd = add_command(app, "summarize",
                                "Write per-graph topology statistics as CSV", o->seed);
    cmd->add_option("--in", o->in, "Input dataset path")->required();
    cmd->add_option("--out", o->out, "Output summary CSV path")->required();
    cmd->callback([o] { run_summarize(*o); });
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOpts {
    std::string in;
    std::string out_dir;
    std::uint64_t seed = 0;
};

void run_analyze(const AnalyzeOpts& o) {
    const std::vector<TopoSummary> rows = read_summary_csv(o.in);
    const TopoReport report = build_report(rows);
    json j = report_to_json(report);
    j["command"] = "analyze";
    j["in"] = o.in;
    j["graphs"] = rows.size();
    if (!o.out_dir.empty()) {
        write_report_files(report, o.out_dir);
        j["out_dir"] = o.out_dir;
    }
    emit(j);
}

void add_analyze(CLI::App& app) {
    auto o = std::make_shared<AnalyzeOpts>();
    CLI::App* cmd = add_command(app, "analyze",
                                "Build the class-comparison report from a summary CSV",
                                o->seed);
    cmd->add_option("--in", o->in, "Input summary CSV path")->required();
    cmd->add_option("--out-dir", o->out_dir, "Directory for plot-ready report CSVs");
    cmd->callback([o] { run_analyze(*o); });
}

// ---------------------------------------------------------------- train

struct TrainOpts {
    std::string data;
    std::string out;
    std::string out_last;
    std::string log;
    std::string model = "bettergnn";
    TrainConfig config;
};

void add_train_flags(CLI::App* cmd, const std::shared_ptr<TrainOpts>& o) {
    cmd->add_option("--data", o->data, "Dataset path")->required();
    cmd->add_option("--model", o->model, "Model kind")
        ->check(CLI::IsMember({"bettergnn", "gcn", "sage", "gat"}))
        ->capture_default_str();
    cmd->add_option("--epochs", o->config.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch-size", o->config.batch_size, "Graphs per batch")
        ->capture_default_str();
    cmd->add_option("--lr", o->config.learning_rate, "Adam learning rate")
        ->capture_default_str();
    cmd->add_option("--weight-decay", o->config.weight_decay, "Coupled L2 strength")
        ->capture_default_str();
    cmd->add_option("--dropout", o->config.dropout_rate, "Dropout rate (bettergnn head)")
        ->capture_default_str();
    cmd->add_option("--hidden", o->config.hidden_dim, "Hidden width")->capture_default_str();
    cmd->add_flag("--concat-news", o->config.concat_news,
                  "Concatenate the root node features to the pooled baseline embedding");
    cmd->add_option("--train-frac", o->config.fractions.train, "Training fraction")
        ->capture_default_str();
    cmd->add_option("--val-frac", o->config.fractions.val, "Validation fraction")
        ->capture_default_str();
    cmd->add_option("--test-frac", o->config.fractions.test, "Test fraction")
        ->capture_default_str();
}

void run_train(const TrainOpts& o) {
    TrainConfig config = o.config;
    config.model_kind = model_kind_from_name(o.model);
    const GraphDataset ds = load_dataset(o.data);
    const TrainResult result = train(ds, config);

    if (!o.out.empty()) save_checkpoint(result.best, o.out);
    if (!o.out_last.empty()) save_checkpoint(result.last, o.out_last);
    if (!o.log.empty()) write_epoch_log_csv(result.log, o.log);

    json j;
    j["command"] = "train";
    j["data"] = o.data;
    j["model"] = o.model;
    j["seed"] = config.seed;
    j["epochs"] = config.epochs;
    j["best_epoch"] = result.best_epoch;
    j["val"] = eval_report_to_json(evaluate_checkpoint(result.best, ds, Split::Val));
    j["test"] = eval_report_to_json(evaluate_checkpoint(result.best, ds, Split::Test));
    if (!result.log.empty()) j["final_train_loss"] = result.log.back().train_loss;
    if (!o.out.empty()) j["out"] = o.out;
    if (!o.out_last.empty()) j["out_last"] = o.out_last;
    if (!o.log.empty()) j["log"] = o.log;
    emit(j);
}

void add_train(CLI::App& app) {
    auto o = std::make_shared<TrainOpts>();
    CLI::App* cmd = add_command(app, "train", "Train a classifier and write checkpoints",
                                o->config.seed);
    add_train_flags(cmd, o);
    cmd->add_option("--out", o->out, "Best-checkpoint output path");
    cmd->add_option("--out-last", o->out_last, "Last-epoch checkpoint output path");
    cmd->add_option("--log", o->log, "Per-epoch CSV log path");
    cmd->callback([o] { run_train(*o); });
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
    std::string data;
    std::string checkpoint;
    std::string split = "test";
    std::uint64_t seed = 0;
};

void run_eval(const EvalOpts& o) {
    const GraphDataset ds = load_dataset(o.data);
    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    const auto split = split_from_name(o.split);
    if (!split) throw UsageError("BadSplit", "unknown split '" + o.split + "'");
    json j = eval_report_to_json(evaluate_checkpoint(ckpt, ds, *split));
    j["command"] = "eval";
    j["data"] = o.data;
    j["checkpoint"] = o.checkpoint;
    j["model"] = model_kind_name(ckpt.model.kind);
    j["split"] = o.split;
    j["epochs_done"] = ckpt.epochs_done;
    emit(j);
}

void add_eval(CLI::App& app) {
    auto o = std::make_shared<EvalOpts>();
    CLI::App* cmd = add_command(app, "eval", "Evaluate a checkpoint on one dataset split",
                                o->seed);
    cmd->add_option("--data", o->data, "Dataset path")->required();
    cmd->add_option("--checkpoint", o->checkpoint, "Checkpoint path")->required();
    cmd->add_option("--split", o->split, "Split to score")
        ->check(CLI::IsMember({"train", "val", "test"}))
        ->capture_default_str();
    cmd->callback([o] { run_eval(*o); });
}

// ---------------------------------------------------------------- ablate

struct AblateOpts {
    TrainOpts train;
    bool preserve_degrees = false;
};

void run_ablate(const AblateOpts& o) {
    TrainConfig config = o.train.config;
    config.model_kind = model_kind_from_name(o.train.model);
    const GraphDataset ds = load_dataset(o.train.data);
    const AblationReport report = run_ablation(ds, config, o.preserve_degrees);
    json j = ablation_report_to_json(report);
    j["command"] = "ablate";
    j["data"] = o.train.data;
    j["model"] = o.train.model;
    j["preserve_degrees"] = o.preserve_degrees;
    emit(j);
}

void add_ablate(CLI::App& app) {
    auto o = std::make_shared<AblateOpts>();
    CLI::App* cmd = add_command(app, "ablate",
                                "Train on original, edge-randomized, and noise-feature "
                                "copies and compare test accuracy",
                                o->train.config.seed);
    add_train_flags(cmd, std::shared_ptr<TrainOpts>(o, &o->train));
    cmd->add_flag("--preserve-degrees", o->preserve_degrees,
                  "Randomize edges with degree-preserving swaps");
    cmd->callback([o] { run_ablate(*o); });
}

// ---------------------------------------------------------------- gradcheck

struct GradCheckOpts {
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    std::size_t samples = 100;
    std::uint64_t seed = 0;
};

void run_gradcheck(const GradCheckOpts& o) {
    const std::vector<GradCheckCase> cases =
        run_standard_grad_checks(o.seed, o.epsilon, o.tolerance, o.samples);
    json j;
    j["command"] = "gradcheck";
    j["epsilon"] = o.epsilon;
    j["tolerance"] = o.tolerance;
    j["seed"] = o.seed;
    bool all = true;
    j["cases"] = json::array();
    for (const GradCheckCase& c : cases) {
        json row;
        row["name"] = c.name;
        row["passed"] = c.report.passed;
        row["samples"] = c.report.samples;
        row["skipped"] = c.report.skipped;
        row["worst_rel_err"] = c.report.worst_rel_err;
        row["worst_param"] = c.report.worst_param;
        row["worst_index"] = c.report.worst_index;
        row["worst_analytic"] = c.report.worst_analytic;
        row["worst_numeric"] = c.report.worst_numeric;
        j["cases"].push_back(row);
        all = all && c.report.passed;
    }
    j["passed"] = all;
    emit(j);
    require_all_passed(cases);
}

void add_gradcheck(CLI::App& app) {
    auto o = std::make_shared<GradCheckOpts>();
    CLI::App* cmd = add_command(app, "gradcheck",
                                "Verify analytic gradients against central differences",
                                o->seed);
    cmd->add_option("--epsilon", o->epsilon, "Finite-difference step")->capture_default_str();
    cmd->add_option("--tolerance", o->tolerance, "Relative-error tolerance")
        ->capture_default_str();
    cmd->add_option("--samples", o->samples, "Max sampled coordinates per case")
        ->capture_default_str();
    cmd->callback([o] { run_gradcheck(*o); });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Propagation-graph fake-news classification toolkit"};
    app.require_subcommand(1);
    add_gen(app);
    add_augment(app);
    add_summarize(app);
    add_analyze(app);
    add_train(app);
    add_eval(app);
    add_ablate(app);
    add_gradcheck(app);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        emit_error("UsageError", e.what());
        return 1;
    } catch (const UsageError& e) {
        emit_error(e.code(), e.what());
        return 1;
    } catch (const CheckError& e) {
        emit_error(e.code(), e.what());
        return 3;
    } catch (const DataError& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("InternalError", e.what());
        return 1;
    }
}
