#include "newsprop/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <system_error>

#include "newsprop/topo.hpp"

namespace newsprop {

namespace {

constexpr std::uint64_t kInitStream = 0x101;
constexpr std::uint64_t kShuffleStream = 0x202;
constexpr std::uint64_t kDropoutStream = 0x303;

std::string rng_to_string(const Rng& rng) {
    std::ostringstream out;
    rng.save_state(out);
    return out.str();
}

Rng rng_from_string(const std::string& state) {
    Rng rng(0);
    std::istringstream in(state);
    rng.load_state(in);
    if (in.fail())
        throw DataError("ParseError", "malformed RNG state in checkpoint");
    return rng;
}

} // namespace

void TrainConfig::validate() const {
    if (learning_rate < 0.0)
        throw UsageError("BadConfig", "learning_rate must be non-negative");
    if (weight_decay < 0.0)
        throw UsageError("BadConfig", "weight_decay must be non-negative");
    if (batch_size < 1)
        throw UsageError("BadConfig", "batch_size must be at least 1");
    if (epochs < 1)
        throw UsageError("BadConfig", "epochs must be at least 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw UsageError("BadConfig", "dropout_rate must be in [0, 1)");
    if (hidden_dim == 0)
        throw UsageError("BadConfig", "hidden_dim must be positive");
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

void adam_step(const std::vector<Parameter*>& params, const TrainConfig& config) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    for (Parameter* p : params) {
        if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols() ||
            p->m.rows() != p->value.rows() || p->v.rows() != p->value.rows())
            throw DataError("NoGradient", "parameter " + p->name +
                                              " has no gradient of matching shape");
        p->step_count += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p->step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p->step_count));
        const double wd = p->decay ? config.weight_decay : 0.0;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data()[i] + wd * p->value.data()[i];
            double& m = p->m.data()[i];
            double& v = p->v.data()[i];
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            p->value.data()[i] -=
                config.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
        p->value.check_finite("adam update of " + p->name);
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

void check_metric_inputs(std::size_t labels, std::size_t other, const char* what) {
    if (labels == 0)
        throw DataError("EmptySplit", "no examples to score");
    if (labels != other)
        throw DataError("ShapeMismatch", std::string(what) + " count " +
                                             std::to_string(other) + " vs " +
                                             std::to_string(labels) + " labels");
}

void check_binary(const std::vector<int>& values, const char* what) {
    for (int v : values)
        if (v != 0 && v != 1)
            throw DataError("LabelOutOfRange",
                            std::string(what) + " must be 0 or 1, got " + std::to_string(v));
}

} // namespace

double auc_score(const std::vector<int>& labels, const std::vector<double>& fake_scores) {
    check_metric_inputs(labels.size(), fake_scores.size(), "score");
    check_binary(labels, "label");
    const std::size_t n = labels.size();
    std::size_t positives = 0;
    for (int y : labels) positives += static_cast<std::size_t>(y);
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) return 0.5;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fake_scores[a] < fake_scores[b];
    });

    // Mid-ranks over tie groups, 1-based.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && fake_scores[order[j]] == fake_scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) positive_rank_sum += mid_rank;
        i = j;
    }
    const double u = positive_rank_sum -
                     0.5 * static_cast<double>(positives) * static_cast<double>(positives + 1);
    return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

EvalReport compute_metrics(const std::vector<int>& labels,
                           const std::vector<int>& predictions,
                           const std::vector<double>& fake_scores) {
    check_metric_inputs(labels.size(), predictions.size(), "prediction");
    check_binary(labels, "label");
    check_binary(predictions, "prediction");

    EvalReport report;
    report.count = static_cast<long>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        report.confusion[static_cast<std::size_t>(labels[i])]
                        [static_cast<std::size_t>(predictions[i])] += 1;

    // Each metric is one division of exact integer counts, so values are
    // correctly rounded (macro F1 uses the common-denominator form).
    long correct = 0;
    long f1_num[2], f1_den[2];
    for (std::size_t c = 0; c < 2; ++c) {
        const long tp = report.confusion[c][c];
        const long fp = report.confusion[1 - c][c];
        const long fn = report.confusion[c][1 - c];
        report.precision[c] =
            tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        report.recall[c] =
            tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        f1_num[c] = 2 * tp;
        f1_den[c] = 2 * tp + fp + fn;
        if (f1_den[c] == 0) f1_den[c] = 1;
        report.f1[c] = static_cast<double>(f1_num[c]) / static_cast<double>(f1_den[c]);
        correct += tp;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.count);
    report.macro_f1 = static_cast<double>(f1_num[0] * f1_den[1] + f1_num[1] * f1_den[0]) /
                      static_cast<double>(2 * f1_den[0] * f1_den[1]);
    report.auc = auc_score(labels, fake_scores);
    return report;
}

double macro_f1_score(const std::vector<int>& labels, const std::vector<int>& predictions) {
    std::vector<double> neutral(labels.size(), 0.0);
    return compute_metrics(labels, predictions, neutral).macro_f1;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization (strict token format, hexfloat payload)
// ---------------------------------------------------------------------------

namespace {

std::string format_hex(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::hex);
    if (ec != std::errc{})
        throw NumericError("NonFinite", "cannot serialize value");
    return std::string(buf, ptr);
}

double parse_hex(const std::string& token) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x,
                                     std::chars_format::hex);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw DataError("ParseError", "bad hexfloat token '" + token + "'");
    return x;
}

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string next(const char* context) {
        std::string tok;
        if (!(in_ >> tok))
            throw DataError("ParseError", std::string("checkpoint truncated at ") + context);
        return tok;
    }

    void expect(const std::string& literal) {
        const std::string tok = next(literal.c_str());
        if (tok != literal)
            throw DataError("ParseError",
                            "checkpoint expected '" + literal + "', got '" + tok + "'");
    }

    long integer(const char* context) {
        const std::string tok = next(context);
        long value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw DataError("ParseError", std::string("bad integer for ") + context);
        return value;
    }

    std::uint64_t unsigned_integer(const char* context) {
        const std::string tok = next(context);
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw DataError("ParseError", std::string("bad integer for ") + context);
        return value;
    }

    double real(const char* context) { return parse_hex(next(context)); }

private:
    std::istream& in_;
};

std::size_t count_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::size_t count = 0;
    while (in >> tok) ++count;
    return count;
}

void write_values(std::ostream& out, const char* tag, const std::vector<double>& values) {
    out << tag;
    for (double v : values) out << ' ' << format_hex(v);
    out << '\n';
}

std::vector<double> read_values(TokenReader& reader, const char* tag, std::size_t count) {
    reader.expect(tag);
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = reader.real(tag);
    return values;
}

void write_rng_line(std::ostream& out, const char* tag, const std::string& state) {
    out << tag << ' ' << count_tokens(state) << ' ' << state << '\n';
}

std::string read_rng_line(TokenReader& reader, const char* tag) {
    reader.expect(tag);
    const long count = reader.integer(tag);
    std::string state;
    for (long i = 0; i < count; ++i) {
        if (i > 0) state += ' ';
        state += reader.next(tag);
    }
    return state;
}

} // namespace

Checkpoint snapshot_model(GraphClassifier& model, const TrainConfig& config,
                          int epochs_done, const Rng& shuffle_rng, const Rng& dropout_rng) {
    Checkpoint ckpt;
    ckpt.model = model.config();
    ckpt.train = config;
    ckpt.epochs_done = epochs_done;
    ckpt.shuffle_rng = rng_to_string(shuffle_rng);
    ckpt.dropout_rng = rng_to_string(dropout_rng);
    for (Parameter* p : model.parameters()) {
        Checkpoint::ParamEntry entry;
        entry.name = p->name;
        entry.rows = p->value.rows();
        entry.cols = p->value.cols();
        entry.value = p->value.data();
        entry.m = p->m.data();
        entry.v = p->v.data();
        entry.step_count = p->step_count;
        entry.decay = p->decay;
        ckpt.params.push_back(std::move(entry));
    }
    for (auto& [name, values] : model.state_buffers())
        ckpt.buffers.push_back({name, *values});
    return ckpt;
}

std::unique_ptr<GraphClassifier> restore_model(const Checkpoint& ckpt) {
    Rng scratch(0);  // initial weights are overwritten below
    auto model = make_model(ckpt.model, scratch);
    auto params = model->parameters();
    if (params.size() != ckpt.params.size())
        throw DataError("CheckpointMismatch",
                        "checkpoint has " + std::to_string(ckpt.params.size()) +
                            " parameters, model has " + std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter* p = params[i];
        const Checkpoint::ParamEntry& entry = ckpt.params[i];
        if (entry.name != p->name || entry.rows != p->value.rows() ||
            entry.cols != p->value.cols())
            throw DataError("CheckpointMismatch",
                            "parameter " + std::to_string(i) + " is " + entry.name +
                                " in the checkpoint but " + p->name + " in the model");
        p->value.data() = entry.value;
        p->m.data() = entry.m;
        p->v.data() = entry.v;
        p->step_count = entry.step_count;
        p->decay = entry.decay;
    }
    auto buffers = model->state_buffers();
    if (buffers.size() != ckpt.buffers.size())
        throw DataError("CheckpointMismatch", "state buffer count mismatch");
    for (std::size_t i = 0; i < buffers.size(); ++i) {
        if (ckpt.buffers[i].name != buffers[i].first ||
            ckpt.buffers[i].values.size() != buffers[i].second->size())
            throw DataError("CheckpointMismatch",
                            "state buffer mismatch at " + ckpt.buffers[i].name);
        *buffers[i].second = ckpt.buffers[i].values;
    }
    return model;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("IoError", "cannot open " + path + " for writing");
    out << "newsprop-checkpoint v1\n";
    out << "model.kind " << model_kind_name(ckpt.model.kind) << '\n';
    out << "model.feat_dim " << ckpt.model.feat_dim << '\n';
    out << "model.hidden_dim " << ckpt.model.hidden_dim << '\n';
    out << "model.dropout_rate " << format_hex(ckpt.model.dropout_rate) << '\n';
    out << "model.concat_news " << (ckpt.model.concat_news ? 1 : 0) << '\n';
    out << "train.model_kind " << model_kind_name(ckpt.train.model_kind) << '\n';
    out << "train.learning_rate " << format_hex(ckpt.train.learning_rate) << '\n';
    out << "train.weight_decay " << format_hex(ckpt.train.weight_decay) << '\n';
    out << "train.batch_size " << ckpt.train.batch_size << '\n';
    out << "train.epochs " << ckpt.train.epochs << '\n';
    out << "train.seed " << ckpt.train.seed << '\n';
    out << "train.dropout_rate " << format_hex(ckpt.train.dropout_rate) << '\n';
    out << "train.hidden_dim " << ckpt.train.hidden_dim << '\n';
    out << "train.concat_news " << (ckpt.train.concat_news ? 1 : 0) << '\n';
    out << "train.frac_train " << format_hex(ckpt.train.fractions.train) << '\n';
    out << "train.frac_val " << format_hex(ckpt.train.fractions.val) << '\n';
    out << "train.frac_test " << format_hex(ckpt.train.fractions.test) << '\n';
    out << "epochs_done " << ckpt.epochs_done << '\n';
    write_rng_line(out, "rng.shuffle", ckpt.shuffle_rng);
    write_rng_line(out, "rng.dropout", ckpt.dropout_rng);
    out << "params " << ckpt.params.size() << '\n';
    for (const auto& entry : ckpt.params) {
        out << "param " << entry.name << ' ' << entry.rows << ' ' << entry.cols << ' '
            << entry.step_count << ' ' << (entry.decay ? 1 : 0) << '\n';
        write_values(out, "value", entry.value);
        write_values(out, "m", entry.m);
        write_values(out, "v", entry.v);
    }
    out << "buffers " << ckpt.buffers.size() << '\n';
    for (const auto& buffer : ckpt.buffers) {
        out << "buffer " << buffer.name << ' ' << buffer.values.size() << '\n';
        write_values(out, "data", buffer.values);
    }
    out << "end\n";
    if (!out)
        throw DataError("IoError", "write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("IoError", "cannot open " + path);
    TokenReader reader(in);
    reader.expect("newsprop-checkpoint");
    const std::string version = reader.next("version");
    if (version != "v1")
        throw DataError("VersionMismatch", "checkpoint version " + version +
                                               ", expected v1");
    Checkpoint ckpt;
    reader.expect("model.kind");
    ckpt.model.kind = model_kind_from_name(reader.next("model.kind"));
    reader.expect("model.feat_dim");
    ckpt.model.feat_dim = static_cast<std::size_t>(reader.integer("model.feat_dim"));
    reader.expect("model.hidden_dim");
    ckpt.model.hidden_dim = static_cast<std::size_t>(reader.integer("model.hidden_dim"));
    reader.expect("model.dropout_rate");
    ckpt.model.dropout_rate = reader.real("model.dropout_rate");
    reader.expect("model.concat_news");
    ckpt.model.concat_news = reader.integer("model.concat_news") != 0;
    reader.expect("train.model_kind");
    ckpt.train.model_kind = model_kind_from_name(reader.next("train.model_kind"));
    reader.expect("train.learning_rate");
    ckpt.train.learning_rate = reader.real("train.learning_rate");
    reader.expect("train.weight_decay");
    ckpt.train.weight_decay = reader.real("train.weight_decay");
    reader.expect("train.batch_size");
    ckpt.train.batch_size = static_cast<int>(reader.integer("train.batch_size"));
    reader.expect("train.epochs");
    ckpt.train.epochs = static_cast<int>(reader.integer("train.epochs"));
    reader.expect("train.seed");
    ckpt.train.seed = reader.unsigned_integer("train.seed");
    reader.expect("train.dropout_rate");
    ckpt.train.dropout_rate = reader.real("train.dropout_rate");
    reader.expect("train.hidden_dim");
    ckpt.train.hidden_dim = static_cast<std::size_t>(reader.integer("train.hidden_dim"));
    reader.expect("train.concat_news");
    ckpt.train.concat_news = reader.integer("train.concat_news") != 0;
    reader.expect("train.frac_train");
    ckpt.train.fractions.train = reader.real("train.frac_train");
    reader.expect("train.frac_val");
    ckpt.train.fractions.val = reader.real("train.frac_val");
    reader.expect("train.frac_test");
    ckpt.train.fractions.test = reader.real("train.frac_test");
    reader.expect("epochs_done");
    ckpt.epochs_done = static_cast<int>(reader.integer("epochs_done"));
    ckpt.shuffle_rng = read_rng_line(reader, "rng.shuffle");
    ckpt.dropout_rng = read_rng_line(reader, "rng.dropout");
    reader.expect("params");
    const long num_params = reader.integer("params");
    for (long i = 0; i < num_params; ++i) {
        reader.expect("param");
        Checkpoint::ParamEntry entry;
        entry.name = reader.next("param name");
        entry.rows = static_cast<std::size_t>(reader.integer("param rows"));
        entry.cols = static_cast<std::size_t>(reader.integer("param cols"));
        entry.step_count = reader.integer("param step_count");
        entry.decay = reader.integer("param decay") != 0;
        const std::size_t count = entry.rows * entry.cols;
        entry.value = read_values(reader, "value", count);
        entry.m = read_values(reader, "m", count);
        entry.v = read_values(reader, "v", count);
        ckpt.params.push_back(std::move(entry));
    }
    reader.expect("buffers");
    const long num_buffers = reader.integer("buffers");
    for (long i = 0; i < num_buffers; ++i) {
        reader.expect("buffer");
        Checkpoint::BufferEntry buffer;
        buffer.name = reader.next("buffer name");
        const long count = reader.integer("buffer size");
        buffer.values = read_values(reader, "data", static_cast<std::size_t>(count));
        ckpt.buffers.push_back(std::move(buffer));
    }
    reader.expect("end");
    return ckpt;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct Prepared {
    GraphDataset ds;                       // split-carrying dataset, raw features
    std::vector<PropagationGraph> inputs;  // model-ready features, same order
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
};

Prepared prepare(const GraphDataset& dataset, const TrainConfig& config) {
    Prepared out;
    out.ds = dataset.has_splits() ? dataset
                                  : split_dataset(dataset, config.fractions, config.seed);
    out.train_idx = out.ds.split_indices(Split::Train);
    out.val_idx = out.ds.split_indices(Split::Val);
    if (out.train_idx.empty())
        throw DataError("EmptySplit", "train split is empty");
    if (out.val_idx.empty())
        throw DataError("EmptySplit", "val split is empty");

    bool train_has[2] = {false, false};
    for (std::size_t i : out.train_idx) train_has[out.ds.graphs[i].label] = true;
    if (!train_has[0] || !train_has[1])
        throw DataError("ClassMissing", "train split must contain both labels");

    const bool augment = config.model_kind == ModelKind::BetterGnn;
    out.inputs.reserve(out.ds.graphs.size());
    for (const auto& g : out.ds.graphs)
        out.inputs.push_back(augment ? augment_features(g) : g);
    return out;
}

// Consecutive index ranges of batch_size; a trailing single graph is folded
// into the previous batch so train-mode batchnorm always sees >= 2 rows.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n,
                                                              int batch_size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const auto step = static_cast<std::size_t>(batch_size);
    for (std::size_t begin = 0; begin < n; begin += step)
        out.emplace_back(begin, std::min(begin + step, n));
    if (out.size() >= 2 && out.back().second - out.back().first == 1) {
        out[out.size() - 2].second = out.back().second;
        out.pop_back();
    }
    return out;
}

EvalReport evaluate_prepared(GraphClassifier& model, const Prepared& data,
                             const std::vector<std::size_t>& indices) {
    std::vector<int> labels;
    std::vector<int> predictions;
    std::vector<double> scores;
    labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const BatchedGraph batch = batch_graphs({data.inputs[i]});
        const Tensor2D probs = model.predict(batch);
        labels.push_back(data.ds.graphs[i].label);
        predictions.push_back(probs(0, 1) > probs(0, 0) ? 1 : 0);
        scores.push_back(probs(0, 1));
    }
    return compute_metrics(labels, predictions, scores);
}

TrainResult run_epochs(const GraphDataset& dataset, const TrainConfig& config,
                       GraphClassifier& model, Rng& shuffle_rng, Rng& dropout_rng,
                       int start_epoch, int end_epoch) {
    const Prepared data = prepare(dataset, config);

    TrainResult result;
    result.best_epoch = start_epoch;
    double best_key = -std::numeric_limits<double>::infinity();

    for (int epoch = start_epoch; epoch < end_epoch; ++epoch) {
        std::vector<std::size_t> order = data.train_idx;
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (auto [begin, end] : batch_ranges(order.size(), config.batch_size)) {
            std::vector<PropagationGraph> graphs;
            graphs.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) graphs.push_back(data.inputs[order[k]]);
            const BatchedGraph batch = batch_graphs(graphs);
            const Tensor2D probs = model.forward(batch, Mode::Train, dropout_rng);
            loss_sum += cross_entropy(probs, batch.labels) *
                        static_cast<double>(batch.num_graphs);
            model.zero_grads();
            model.backward(batch.labels);
            adam_step(model.parameters(), config);
        }

        const EvalReport val = evaluate_prepared(model, data, data.val_idx);
        EpochLog log;
        log.epoch = epoch + 1;
        log.train_loss = loss_sum / static_cast<double>(order.size());
        log.val_accuracy = val.accuracy;
        log.val_macro_f1 = val.macro_f1;
        log.val_auc = val.auc;
        result.log.push_back(log);

        if (val.macro_f1 > best_key) {
            best_key = val.macro_f1;
            result.best_epoch = epoch + 1;
            result.best = snapshot_model(model, config, epoch + 1, shuffle_rng, dropout_rng);
        }
    }

    result.last = snapshot_model(model, config, end_epoch, shuffle_rng, dropout_rng);
    if (result.log.empty()) result.best = result.last;
    return result;
}

} // namespace

TrainResult train(const GraphDataset& dataset, const TrainConfig& config) {
    config.validate();
    ModelConfig mc;
    mc.kind = config.model_kind;
    mc.feat_dim = static_cast<std::size_t>(dataset.feat_dim());
    mc.hidden_dim = config.hidden_dim;
    mc.dropout_rate = config.model_kind == ModelKind::BetterGnn ? config.dropout_rate : 0.0;
    mc.concat_news = config.concat_news;

    Rng init_rng(mix_seed(config.seed, kInitStream));
    auto model = make_model(mc, init_rng);
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    Rng dropout_rng(mix_seed(config.seed, kDropoutStream));
    return run_epochs(dataset, config, *model, shuffle_rng, dropout_rng, 0, config.epochs);
}

TrainResult resume_training(const Checkpoint& last, const GraphDataset& dataset,
                            int extra_epochs) {
    if (extra_epochs < 0)
        throw UsageError("BadConfig", "extra_epochs must be non-negative");
    auto model = restore_model(last);
    Rng shuffle_rng = rng_from_string(last.shuffle_rng);
    Rng dropout_rng = rng_from_string(last.dropout_rng);
    // The resumed checkpoints describe the total run, so resuming a 2-epoch
    // checkpoint for 2 more equals a 4-epoch run byte-for-byte.
    TrainConfig total = last.train;
    total.epochs = last.epochs_done + extra_epochs;
    return run_epochs(dataset, total, *model, shuffle_rng, dropout_rng,
                      last.epochs_done, last.epochs_done + extra_epochs);
}

EvalReport evaluate(GraphClassifier& model, const GraphDataset& dataset, Split split) {
    if (!dataset.has_splits())
        throw DataError("EmptySplit", "dataset carries no split assignments");
    const std::vector<std::size_t> indices = dataset.split_indices(split);
    if (indices.empty())
        throw DataError("EmptySplit",
                        std::string(split_name(split)) + " split is empty");

    const bool augment = model.kind() == ModelKind::BetterGnn &&
                         static_cast<std::size_t>(dataset.feat_dim()) ==
                             model.config().feat_dim;
    std::vector<int> labels;
    std::vector<int> predictions;
    std::vector<double> scores;
    for (std::size_t i : indices) {
        const PropagationGraph& g = dataset.graphs[i];
        const BatchedGraph batch = batch_graphs({augment ? augment_features(g) : g});
        const Tensor2D probs = model.predict(batch);
        labels.push_back(g.label);
        predictions.push_back(probs(0, 1) > probs(0, 0) ? 1 : 0);
        scores.push_back(probs(0, 1));
    }
    return compute_metrics(labels, predictions, scores);
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const GraphDataset& dataset,
                               Split split) {
    auto model = restore_model(ckpt);
    if (dataset.has_splits()) return evaluate(*model, dataset, split);
    const GraphDataset with_splits =
        split_dataset(dataset, ckpt.train.fractions, ckpt.train.seed);
    return evaluate(*model, with_splits, split);
}

} // namespace newsprop
