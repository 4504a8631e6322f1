#include "newsprop/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace newsprop {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("IoError", "cannot open " + path + " for writing");
    return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out)
        throw DataError("IoError", "write to " + path + " failed");
}

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{})
        throw NumericError("NonFinite", "cannot format value");
    return std::string(buf, ptr);
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& why) {
    throw DataError("ParseError", path + ":" + std::to_string(line) + ": " + why);
}

json parse_json_line(const std::string& text, const std::string& path, std::size_t line) {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded())
        parse_fail(path, line, "invalid JSON");
    return parsed;
}

} // namespace

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

void save_dataset(const GraphDataset& ds, const std::string& path) {
    std::ofstream out = open_out(path);
    json header;
    header["format"] = "newsprop-dataset";
    header["version"] = 1;
    header["feat_dim"] = ds.feat_dim();
    header["name"] = ds.name;
    out << header.dump() << '\n';

    for (const auto& g : ds.graphs) {
        json rec;
        rec["id"] = g.id;
        rec["label"] = g.label;
        rec["num_nodes"] = g.num_nodes;
        rec["root"] = g.root;
        json edges = json::array();
        for (const Edge& e : g.edges) edges.push_back({e.first, e.second});
        rec["edges"] = std::move(edges);
        json features = json::array();
        for (std::size_t r = 0; r < g.features.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < g.features.cols(); ++c)
                row.push_back(g.features(r, c));
            features.push_back(std::move(row));
        }
        rec["features"] = std::move(features);
        if (ds.has_splits()) {
            const auto it = ds.splits.find(g.id);
            if (it == ds.splits.end())
                throw DataError("ValidationFailed",
                                "graph '" + g.id + "' has no split assignment");
            rec["split"] = split_name(it->second);
        }
        out << rec.dump() << '\n';
    }
    finish_out(out, path);
}

GraphDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("IoError", "cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        parse_fail(path, 1, "empty file");
    ++line_no;

    const json header = parse_json_line(line, path, line_no);
    if (!header.is_object() || header.value("format", "") != "newsprop-dataset")
        parse_fail(path, line_no, "not a newsprop-dataset header");
    if (!header.contains("version") || !header["version"].is_number_integer())
        parse_fail(path, line_no, "missing integer 'version'");
    if (header["version"].get<int>() != 1)
        throw DataError("VersionMismatch",
                        path + ": dataset version " + header["version"].dump() +
                            ", expected 1");
    if (!header.contains("feat_dim") || !header["feat_dim"].is_number_integer() ||
        header["feat_dim"].get<int>() < 0)
        parse_fail(path, line_no, "missing non-negative integer 'feat_dim'");
    const int feat_dim = header["feat_dim"].get<int>();

    GraphDataset ds;
    ds.name = header.value("name", "");
    std::unordered_set<std::string> seen_ids;
    bool any_split = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            parse_fail(path, line_no, "blank line");
        const json rec = parse_json_line(line, path, line_no);
        try {
            PropagationGraph g;
            g.id = rec.at("id").get<std::string>();
            g.label = rec.at("label").get<int>();
            g.num_nodes = rec.at("num_nodes").get<int>();
            g.root = rec.at("root").get<int>();
            if (g.label != 0 && g.label != 1)
                parse_fail(path, line_no, "label must be 0 or 1");
            if (g.num_nodes < 1)
                parse_fail(path, line_no, "num_nodes must be positive");

            const json& edges = rec.at("edges");
            if (!edges.is_array())
                parse_fail(path, line_no, "'edges' must be an array");
            g.edges.reserve(edges.size());
            for (const json& e : edges) {
                if (!e.is_array() || e.size() != 2)
                    parse_fail(path, line_no, "each edge must be a pair");
                g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }

            const json& features = rec.at("features");
            if (!features.is_array() ||
                features.size() != static_cast<std::size_t>(g.num_nodes))
                parse_fail(path, line_no, "'features' must have num_nodes rows");
            g.features = Tensor2D(static_cast<std::size_t>(g.num_nodes),
                                  static_cast<std::size_t>(feat_dim));
            for (std::size_t r = 0; r < features.size(); ++r) {
                const json& row = features[r];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(feat_dim))
                    parse_fail(path, line_no,
                               "feature row width disagrees with header feat_dim");
                for (std::size_t c = 0; c < row.size(); ++c)
                    g.features(r, c) = row[c].get<double>();
            }

            const ValidationResult check = validate_graph(g);
            if (!check.ok)
                throw DataError("ValidationFailed",
                                path + ":" + std::to_string(line_no) + ": graph '" +
                                    g.id + "': " + check.code + ": " + check.message);

            if (!seen_ids.insert(g.id).second)
                parse_fail(path, line_no, "duplicate graph id '" + g.id + "'");

            if (rec.contains("split")) {
                const auto split = split_from_name(rec["split"].get<std::string>());
                if (!split)
                    parse_fail(path, line_no, "unknown split '" +
                                                  rec["split"].get<std::string>() + "'");
                ds.splits[g.id] = *split;
                any_split = true;
            } else if (any_split) {
                parse_fail(path, line_no, "record lacks 'split' but earlier records have it");
            }

            ds.graphs.push_back(std::move(g));
        } catch (const json::exception& e) {
            parse_fail(path, line_no, e.what());
        }
    }

    if (any_split && ds.splits.size() != ds.graphs.size())
        throw DataError("ParseError",
                        path + ": split assignments cover only " +
                            std::to_string(ds.splits.size()) + " of " +
                            std::to_string(ds.graphs.size()) + " graphs");
    return ds;
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSummaryHeader =
    "graph_id,label,avg_degree,mean_degree_centrality,mean_clustering,density,node_count";

void check_csv_safe(const std::string& id) {
    if (id.find_first_of(",\"\n\r") != std::string::npos)
        throw DataError("UnsupportedId",
                        "graph id '" + id + "' contains CSV delimiter characters");
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_csv_double(const std::string& field, const std::string& path, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        parse_fail(path, line, "bad number '" + field + "'");
    return value;
}

long parse_csv_long(const std::string& field, const std::string& path, std::size_t line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        parse_fail(path, line, "bad integer '" + field + "'");
    return value;
}

} // namespace

void write_summary_csv(const std::vector<TopoSummary>& summaries, const std::string& path) {
    std::ofstream out = open_out(path);
    out << kSummaryHeader << '\n';
    for (const auto& s : summaries) {
        check_csv_safe(s.graph_id);
        out << s.graph_id << ',' << s.label << ',' << format_double(s.avg_degree) << ','
            << format_double(s.mean_degree_centrality) << ','
            << format_double(s.mean_clustering) << ',' << format_double(s.density) << ','
            << s.node_count << '\n';
    }
    finish_out(out, path);
}

std::vector<TopoSummary> read_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("IoError", "cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        parse_fail(path, 1, "empty file");
    ++line_no;
    if (line != kSummaryHeader)
        parse_fail(path, line_no, "unexpected header (want '" +
                                      std::string(kSummaryHeader) + "')");

    std::vector<TopoSummary> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            parse_fail(path, line_no, "blank line");
        const auto fields = split_csv_row(line);
        if (fields.size() != 7)
            parse_fail(path, line_no, "expected 7 fields, got " +
                                          std::to_string(fields.size()));
        TopoSummary s;
        s.graph_id = fields[0];
        s.label = static_cast<int>(parse_csv_long(fields[1], path, line_no));
        if (s.label != 0 && s.label != 1)
            parse_fail(path, line_no, "label must be 0 or 1");
        s.avg_degree = parse_csv_double(fields[2], path, line_no);
        s.mean_degree_centrality = parse_csv_double(fields[3], path, line_no);
        s.mean_clustering = parse_csv_double(fields[4], path, line_no);
        s.density = parse_csv_double(fields[5], path, line_no);
        s.node_count = static_cast<int>(parse_csv_long(fields[6], path, line_no));
        out.push_back(std::move(s));
    }
    return out;
}

void write_epoch_log_csv(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "epoch,train_loss,val_accuracy,val_macro_f1,val_auc\n";
    for (const auto& row : log)
        out << row.epoch << ',' << format_double(row.train_loss) << ','
            << format_double(row.val_accuracy) << ',' << format_double(row.val_macro_f1)
            << ',' << format_double(row.val_auc) << '\n';
    finish_out(out, path);
}

// ---------------------------------------------------------------------------
// Topology report files
// ---------------------------------------------------------------------------

void write_report_files(const TopoReport& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw DataError("IoError", "cannot create directory " + dir + ": " + ec.message());
    const std::filesystem::path base(dir);

    {
        const std::string path = (base / "boxstats.csv").string();
        std::ofstream out = open_out(path);
        out << "feature,label,min,q1,median,q3,max,mean\n";
        for (std::size_t f = 0; f < 5; ++f)
            for (std::size_t c = 0; c < 2; ++c) {
                const BoxStats& b = report.box[f][c];
                out << kTopoFeatureNames[f] << ',' << c << ',' << format_double(b.min)
                    << ',' << format_double(b.q1) << ',' << format_double(b.median) << ','
                    << format_double(b.q3) << ',' << format_double(b.max) << ','
                    << format_double(b.mean) << '\n';
            }
        finish_out(out, path);
    }
    {
        const std::string path = (base / "scatter.csv").string();
        std::ofstream out = open_out(path);
        out << "graph_id,label,avg_degree,mean_clustering\n";
        for (const auto& p : report.scatter) {
            check_csv_safe(p.graph_id);
            out << p.graph_id << ',' << p.label << ',' << format_double(p.avg_degree)
                << ',' << format_double(p.mean_clustering) << '\n';
        }
        finish_out(out, path);
    }
    {
        const std::string path = (base / "histogram.csv").string();
        std::ofstream out = open_out(path);
        out << "bin_lo,bin_hi,count_real,count_fake\n";
        const auto& h = report.node_count_histogram;
        for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
            out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ','
                << h.counts[0][b] << ',' << h.counts[1][b] << '\n';
        finish_out(out, path);
    }
    {
        const std::string path = (base / "correlation.csv").string();
        std::ofstream out = open_out(path);
        out << "feature";
        for (const char* name : kTopoFeatureNames) out << ',' << name;
        out << '\n';
        for (std::size_t f = 0; f < 5; ++f) {
            out << kTopoFeatureNames[f];
            for (std::size_t g = 0; g < 5; ++g)
                out << ',' << format_double(report.correlation[f][g]);
            out << '\n';
        }
        finish_out(out, path);
    }
}

// ---------------------------------------------------------------------------
// JSON payloads
// ---------------------------------------------------------------------------

nlohmann::json report_to_json(const TopoReport& report) {
    json out;
    json box;
    for (std::size_t f = 0; f < 5; ++f) {
        json per_class;
        const char* class_names[2] = {"real", "fake"};
        for (std::size_t c = 0; c < 2; ++c) {
            const BoxStats& b = report.box[f][c];
            per_class[class_names[c]] = {{"min", b.min},     {"q1", b.q1},
                                         {"median", b.median}, {"q3", b.q3},
                                         {"max", b.max},     {"mean", b.mean}};
        }
        box[kTopoFeatureNames[f]] = std::move(per_class);
    }
    out["box"] = std::move(box);

    json scatter = json::array();
    for (const auto& p : report.scatter)
        scatter.push_back({{"graph_id", p.graph_id},
                           {"label", p.label},
                           {"avg_degree", p.avg_degree},
                           {"mean_clustering", p.mean_clustering}});
    out["scatter"] = std::move(scatter);

    out["histogram"] = {{"edges", report.node_count_histogram.edges},
                        {"real", report.node_count_histogram.counts[0]},
                        {"fake", report.node_count_histogram.counts[1]}};

    json features = json::array();
    for (const char* name : kTopoFeatureNames) features.push_back(name);
    json matrix = json::array();
    for (const auto& row : report.correlation) {
        json r = json::array();
        for (double v : row) r.push_back(v);
        matrix.push_back(std::move(r));
    }
    json degenerate = json::array();
    for (bool d : report.degenerate) degenerate.push_back(d);
    out["correlation"] = {{"features", std::move(features)},
                          {"matrix", std::move(matrix)},
                          {"degenerate", std::move(degenerate)}};

    json comparisons = json::array();
    for (const auto& row : compare_classes(report))
        comparisons.push_back({{"feature", row.feature},
                               {"mean_real", row.mean_real},
                               {"mean_fake", row.mean_fake},
                               {"direction", row.direction}});
    out["comparisons"] = std::move(comparisons);
    return out;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    return {{"accuracy", report.accuracy},
            {"macro_f1", report.macro_f1},
            {"auc", report.auc},
            {"precision", report.precision},
            {"recall", report.recall},
            {"f1", report.f1},
            {"confusion", {{report.confusion[0][0], report.confusion[0][1]},
                           {report.confusion[1][0], report.confusion[1][1]}}},
            {"count", report.count}};
}

nlohmann::json ablation_report_to_json(const AblationReport& report) {
    return {{"accuracy_original", report.accuracy_original},
            {"accuracy_feature_only", report.accuracy_feature_only},
            {"accuracy_structure_only", report.accuracy_structure_only},
            {"degradation_structure", report.degradation_structure},
            {"degradation_features", report.degradation_features},
            {"seed", report.seed},
            {"dataset", report.dataset}};
}

} // namespace newsprop
