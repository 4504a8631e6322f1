#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "newsprop/ablation.hpp"
#include "newsprop/analysis.hpp"
#include "newsprop/graph.hpp"
#include "newsprop/topo.hpp"
#include "newsprop/train.hpp"

namespace newsprop {

// Newline-delimited JSON: a header object, then one object per graph.
// Serialization is byte-deterministic (sorted keys, shortest round-trip
// numbers), and parse(serialize(ds)) == ds field-by-field, splits included.
void save_dataset(const GraphDataset& ds, const std::string& path);
GraphDataset load_dataset(const std::string& path);

// Summary table, one row per graph:
// graph_id,label,avg_degree,mean_degree_centrality,mean_clustering,density,node_count
void write_summary_csv(const std::vector<TopoSummary>& summaries, const std::string& path);
std::vector<TopoSummary> read_summary_csv(const std::string& path);

// Per-epoch training log: epoch,train_loss,val_accuracy,val_macro_f1,val_auc
void write_epoch_log_csv(const std::vector<EpochLog>& log, const std::string& path);

// Plot-ready report files into `dir`: boxstats.csv, scatter.csv,
// histogram.csv, correlation.csv.
void write_report_files(const TopoReport& report, const std::string& dir);

nlohmann::json report_to_json(const TopoReport& report);
nlohmann::json eval_report_to_json(const EvalReport& report);
nlohmann::json ablation_report_to_json(const AblationReport& report);

} // namespace newsprop
