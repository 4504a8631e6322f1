#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "newsprop/graph.hpp"
#include "newsprop/model.hpp"

namespace newsprop {

struct TrainConfig {
    ModelKind model_kind = ModelKind::BetterGnn;
    double learning_rate = 1e-3;
    double weight_decay = 5e-4;
    int batch_size = 64;
    int epochs = 50;
    std::uint64_t seed = 0;
    double dropout_rate = 0.5;
    std::size_t hidden_dim = 128;
    bool concat_news = false;
    SplitFractions fractions{};

    void validate() const;
};

// One Adam update over the accumulated gradients: beta1 0.9, beta2 0.999,
// eps 1e-8, bias correction, coupled L2 decay (skipped where Parameter::decay
// is off). Throws NoGradient when a gradient shape disagrees with its value.
void adam_step(const std::vector<Parameter*>& params, const TrainConfig& config);

struct EvalReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double auc = 0.0;
    std::array<double, 2> precision{};
    std::array<double, 2> recall{};
    std::array<double, 2> f1{};
    std::array<std::array<long, 2>, 2> confusion{};  // [actual][predicted]
    long count = 0;
};

// labels and predictions in {0,1}; fake_scores are class-1 probabilities.
EvalReport compute_metrics(const std::vector<int>& labels,
                           const std::vector<int>& predictions,
                           const std::vector<double>& fake_scores);
double macro_f1_score(const std::vector<int>& labels, const std::vector<int>& predictions);
// Mann-Whitney rank statistic on class-1 scores, ties counted half. A split
// where one class is absent has no pairs to rank; returns 0.5.
double auc_score(const std::vector<int>& labels, const std::vector<double>& fake_scores);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double val_macro_f1 = 0.0;
    double val_auc = 0.0;
};

// Full training state at an epoch boundary: model weights, Adam moments,
// batchnorm running stats, both RNG streams, and the configs that reproduce
// the data splits. Text format, hexfloat payload, bit-exact round trip.
struct Checkpoint {
    ModelConfig model;
    TrainConfig train;
    int epochs_done = 0;
    std::string shuffle_rng;
    std::string dropout_rng;

    struct ParamEntry {
        std::string name;
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<double> value;
        std::vector<double> m;
        std::vector<double> v;
        long step_count = 0;
        bool decay = true;
    };
    std::vector<ParamEntry> params;

    struct BufferEntry {
        std::string name;
        std::vector<double> values;
    };
    std::vector<BufferEntry> buffers;
};

Checkpoint snapshot_model(GraphClassifier& model, const TrainConfig& config,
                          int epochs_done, const Rng& shuffle_rng, const Rng& dropout_rng);
// Rebuilds the model from a checkpoint; outputs match the source bit-exactly.
std::unique_ptr<GraphClassifier> restore_model(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TrainResult {
    Checkpoint best;  // epoch with the highest validation macro-F1
    Checkpoint last;  // state after the final epoch, the resume point
    std::vector<EpochLog> log;
    int best_epoch = 0;
};

// Splits the dataset per config when it carries no splits, augments features
// when the model kind calls for it, then runs the epoch loop. Deterministic
// for a fixed (dataset, config).
TrainResult train(const GraphDataset& dataset, const TrainConfig& config);

// Continues from `last` for extra_epochs; equals uninterrupted training of
// epochs_done + extra_epochs bit-exactly.
TrainResult resume_training(const Checkpoint& last, const GraphDataset& dataset,
                            int extra_epochs);

// Eval-mode metrics over one split of a raw (unaugmented) dataset; augments
// per graph when the model requires it. Throws EmptySplit.
EvalReport evaluate(GraphClassifier& model, const GraphDataset& dataset, Split split);
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const GraphDataset& dataset,
                               Split split);

} // namespace newsprop
