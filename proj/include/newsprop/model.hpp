#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "newsprop/graph.hpp"
#include "newsprop/nn.hpp"

namespace newsprop {

enum class ModelKind { BetterGnn, Gcn, Sage, Gat };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelConfig {
    ModelKind kind = ModelKind::BetterGnn;
    std::size_t feat_dim = 0;  // raw dataset feature width, before augmentation
    std::size_t hidden_dim = 128;
    double dropout_rate = 0.5;
    bool concat_news = false;

    // Node-feature width the model consumes: feat_dim + 2 for the augmented
    // BetterGNN input, feat_dim for the raw-feature baselines.
    std::size_t input_dim() const;
    void validate() const;
};

// Binary graph classifier: forward caches everything backward needs, backward
// accumulates parameter gradients of the mean cross-entropy at the cached
// forward. One forward, then at most one backward, single thread.
class GraphClassifier {
public:
    virtual ~GraphClassifier() = default;

    // Returns num_graphs x 2 class probabilities; rows sum to 1.
    virtual Tensor2D forward(const BatchedGraph& batch, Mode mode, Rng& dropout_rng) = 0;
    virtual void backward(const std::vector<int>& labels) = 0;

    virtual std::vector<Parameter*> parameters() = 0;
    // Named non-parameter state (batchnorm running stats), for checkpoints.
    virtual std::vector<std::pair<std::string, std::vector<double>*>> state_buffers() = 0;
    virtual const ModelConfig& config() const = 0;

    ModelKind kind() const { return config().kind; }

    // Eval-mode forward; dropout is inert so no caller RNG is needed.
    Tensor2D predict(const BatchedGraph& batch);
    void zero_grads();
};

// GIN encoder, rectifier, attention-pool readout, then the classification
// head linear(h,h) -> batchnorm -> rectifier -> dropout -> linear(h,2) -> softmax.
// Consumes augmented features only (feat_dim + 2 columns).
class BetterGnnModel final : public GraphClassifier {
public:
    BetterGnnModel(const ModelConfig& config, Rng& rng);

    Tensor2D forward(const BatchedGraph& batch, Mode mode, Rng& dropout_rng) override;
    void backward(const std::vector<int>& labels) override;
    std::vector<Parameter*> parameters() override;
    std::vector<std::pair<std::string, std::vector<double>*>> state_buffers() override;
    const ModelConfig& config() const override { return config_; }

    GinConv gin;
    AttentionPool pool;
    Linear fc1;
    BatchNorm bn;
    Linear fc2;

private:
    ModelConfig config_;
    Adjacency adj_;
    Relu conv_relu_;
    Relu head_relu_;
    Dropout drop_;
    Tensor2D probs_;
};

// Single conv (gcn, sage, or gat), rectifier, global max pool, optional
// concatenation of the root node's raw features, linear to 2 logits, softmax.
// Consumes raw features only.
class BaselineModel final : public GraphClassifier {
public:
    BaselineModel(const ModelConfig& config, Rng& rng);

    Tensor2D forward(const BatchedGraph& batch, Mode mode, Rng& dropout_rng) override;
    void backward(const std::vector<int>& labels) override;
    std::vector<Parameter*> parameters() override;
    std::vector<std::pair<std::string, std::vector<double>*>> state_buffers() override;
    const ModelConfig& config() const override { return config_; }

    GcnConv gcn;
    SageConv sage;
    GatConv gat;
    Linear head;

private:
    std::vector<Parameter*> conv_parameters();

    ModelConfig config_;
    Adjacency adj_;
    Relu relu_;
    MaxPool pool_;
    std::size_t pooled_dim_ = 0;
    Tensor2D probs_;
};

std::unique_ptr<GraphClassifier> make_model(const ModelConfig& config, Rng& rng);

} // namespace newsprop
