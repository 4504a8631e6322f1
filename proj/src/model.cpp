#include "newsprop/model.hpp"

#include <utility>

namespace newsprop {

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::BetterGnn: return "bettergnn";
        case ModelKind::Gcn: return "gcn";
        case ModelKind::Sage: return "sage";
        case ModelKind::Gat: return "gat";
    }
    throw UsageError("BadModelKind", "unhandled enum value");
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "bettergnn") return ModelKind::BetterGnn;
    if (name == "gcn") return ModelKind::Gcn;
    if (name == "sage") return ModelKind::Sage;
    if (name == "gat") return ModelKind::Gat;
    throw UsageError("BadModelKind",
                     "unknown model '" + name + "' (expected bettergnn, gcn, sage, gat)");
}

std::size_t ModelConfig::input_dim() const {
    return kind == ModelKind::BetterGnn ? feat_dim + 2 : feat_dim;
}

void ModelConfig::validate() const {
    if (feat_dim == 0)
        throw UsageError("BadConfig", "feat_dim must be positive");
    if (hidden_dim == 0)
        throw UsageError("BadConfig", "hidden_dim must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw UsageError("BadConfig", "dropout_rate must be in [0, 1), got " +
                                          std::to_string(dropout_rate));
    if (concat_news && kind == ModelKind::BetterGnn)
        throw UsageError("BadConfig", "concat_news applies to baseline models only");
}

Tensor2D GraphClassifier::predict(const BatchedGraph& batch) {
    Rng unused(0);
    return forward(batch, Mode::Eval, unused);
}

void GraphClassifier::zero_grads() {
    for (auto* p : parameters()) p->zero_grad();
}

namespace {

void check_input_width(const ModelConfig& config, const BatchedGraph& batch) {
    if (batch.features.cols() != config.input_dim()) {
        const char* expectation = config.kind == ModelKind::BetterGnn
                                      ? " (augmented: feat_dim + 2)"
                                      : " (raw features)";
        throw DataError("DimMismatch",
                        model_kind_name(config.kind) + " expects " +
                            std::to_string(config.input_dim()) + " feature columns" +
                            expectation + ", got " + std::to_string(batch.features.cols()));
    }
}

void check_backward_state(const Tensor2D& probs, const std::vector<int>& labels) {
    if (probs.rows() == 0)
        throw DataError("NoForwardPass", "backward called before forward");
    if (labels.size() != probs.rows())
        throw DataError("ShapeMismatch", "backward got " + std::to_string(labels.size()) +
                                             " labels for " + std::to_string(probs.rows()) +
                                             " graphs");
}

} // namespace

// ---------------------------------------------------------------------------
// BetterGnnModel
// ---------------------------------------------------------------------------

BetterGnnModel::BetterGnnModel(const ModelConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    const std::size_t h = config_.hidden_dim;
    gin = GinConv("gin", config_.input_dim(), h, rng);
    pool = AttentionPool("pool", h, rng);
    fc1 = Linear("head.fc1", h, h, rng);
    bn = BatchNorm("head.bn", h);
    fc2 = Linear("head.fc2", h, 2, rng);
    drop_ = Dropout(config_.dropout_rate);
}

Tensor2D BetterGnnModel::forward(const BatchedGraph& batch, Mode mode, Rng& dropout_rng) {
    check_input_width(config_, batch);
    adj_ = build_adjacency(batch.total_nodes, batch.edges);
    Tensor2D h = conv_relu_.forward(gin.forward(batch.features, adj_));
    Tensor2D z = pool.forward(h, batch.membership, batch.num_graphs);
    z = fc1.forward(z);
    z = bn.forward(z, mode);
    z = head_relu_.forward(z);
    z = drop_.forward(z, mode, dropout_rng);
    probs_ = softmax_rows(fc2.forward(z));
    probs_.check_finite("bettergnn probabilities");
    return probs_;
}

void BetterGnnModel::backward(const std::vector<int>& labels) {
    check_backward_state(probs_, labels);
    Tensor2D g = softmax_cross_entropy_backward(probs_, labels);
    g = fc2.backward(g);
    g = drop_.backward(g);
    g = head_relu_.backward(g);
    g = bn.backward(g);
    g = fc1.backward(g);
    g = pool.backward(g);
    g = conv_relu_.backward(g);
    gin.backward(g);
}

std::vector<Parameter*> BetterGnnModel::parameters() {
    std::vector<Parameter*> out;
    for (auto* p : gin.parameters()) out.push_back(p);
    for (auto* p : pool.parameters()) out.push_back(p);
    for (auto* p : fc1.parameters()) out.push_back(p);
    for (auto* p : bn.parameters()) out.push_back(p);
    for (auto* p : fc2.parameters()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, std::vector<double>*>> BetterGnnModel::state_buffers() {
    return {{"head.bn.running_mean", &bn.running_mean},
            {"head.bn.running_var", &bn.running_var}};
}

// ---------------------------------------------------------------------------
// BaselineModel
// ---------------------------------------------------------------------------

BaselineModel::BaselineModel(const ModelConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    const std::size_t in = config_.input_dim();
    const std::size_t h = config_.hidden_dim;
    switch (config_.kind) {
        case ModelKind::Gcn: gcn = GcnConv("conv", in, h, rng); break;
        case ModelKind::Sage: sage = SageConv("conv", in, h, rng); break;
        case ModelKind::Gat: gat = GatConv("conv", in, h, rng); break;
        case ModelKind::BetterGnn:
            throw UsageError("BadModelKind", "BaselineModel cannot host bettergnn");
    }
    pooled_dim_ = h + (config_.concat_news ? config_.feat_dim : 0);
    head = Linear("head", pooled_dim_, 2, rng);
}

std::vector<Parameter*> BaselineModel::conv_parameters() {
    switch (config_.kind) {
        case ModelKind::Gcn: return gcn.parameters();
        case ModelKind::Sage: return sage.parameters();
        case ModelKind::Gat: return gat.parameters();
        default: return {};
    }
}

Tensor2D BaselineModel::forward(const BatchedGraph& batch, Mode mode, Rng& dropout_rng) {
    (void)mode;
    (void)dropout_rng;
    check_input_width(config_, batch);
    adj_ = build_adjacency(batch.total_nodes, batch.edges);

    Tensor2D h;
    switch (config_.kind) {
        case ModelKind::Gcn: h = gcn.forward(batch.features, adj_); break;
        case ModelKind::Sage: h = sage.forward(batch.features, adj_); break;
        case ModelKind::Gat: h = gat.forward(batch.features, adj_); break;
        default: throw UsageError("BadModelKind", "BaselineModel cannot host bettergnn");
    }
    h = relu_.forward(h);
    Tensor2D pooled = pool_.forward(h, batch.membership, batch.num_graphs);

    if (config_.concat_news) {
        // News-post embedding: the root node's raw feature row.
        Tensor2D joined(pooled.rows(), pooled_dim_);
        for (std::size_t g = 0; g < pooled.rows(); ++g) {
            double* dst = joined.row(g);
            const double* pr = pooled.row(g);
            for (std::size_t j = 0; j < pooled.cols(); ++j) dst[j] = pr[j];
            const double* root = batch.features.row(static_cast<std::size_t>(batch.roots[g]));
            for (std::size_t j = 0; j < config_.feat_dim; ++j) dst[pooled.cols() + j] = root[j];
        }
        pooled = std::move(joined);
    }

    probs_ = softmax_rows(head.forward(pooled));
    probs_.check_finite("baseline probabilities");
    return probs_;
}

void BaselineModel::backward(const std::vector<int>& labels) {
    check_backward_state(probs_, labels);
    Tensor2D g = head.backward(softmax_cross_entropy_backward(probs_, labels));
    if (config_.concat_news) {
        // Root features are inputs, not parameters; only the pooled block
        // propagates further.
        const std::size_t h = config_.hidden_dim;
        Tensor2D pooled_grad(g.rows(), h);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < h; ++j) pooled_grad(r, j) = g(r, j);
        g = std::move(pooled_grad);
    }
    g = pool_.backward(g);
    g = relu_.backward(g);
    switch (config_.kind) {
        case ModelKind::Gcn: gcn.backward(g); break;
        case ModelKind::Sage: sage.backward(g); break;
        case ModelKind::Gat: gat.backward(g); break;
        default: break;
    }
}

std::vector<Parameter*> BaselineModel::parameters() {
    std::vector<Parameter*> out = conv_parameters();
    for (auto* p : head.parameters()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, std::vector<double>*>> BaselineModel::state_buffers() {
    return {};
}

std::unique_ptr<GraphClassifier> make_model(const ModelConfig& config, Rng& rng) {
    if (config.kind == ModelKind::BetterGnn)
        return std::make_unique<BetterGnnModel>(config, rng);
    return std::make_unique<BaselineModel>(config, rng);
}

} // namespace newsprop
