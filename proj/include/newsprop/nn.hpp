#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "newsprop/graph.hpp"
#include "newsprop/rng.hpp"
#include "newsprop/tensor.hpp"

namespace newsprop {

enum class Mode { Train, Eval };

// Trainable tensor with its gradient and Adam moment state. `decay` marks
// whether coupled L2 weight decay applies (off for biases and batchnorm
// scale/shift).
struct Parameter {
    std::string name;
    Tensor2D value;
    Tensor2D grad;
    Tensor2D m;
    Tensor2D v;
    long step_count = 0;
    bool decay = true;

    Parameter() = default;
    Parameter(std::string name, std::size_t rows, std::size_t cols, bool decay = true)
        : name(std::move(name)), value(rows, cols), grad(rows, cols),
          m(rows, cols), v(rows, cols), decay(decay) {}

    void zero_grad() { grad.fill(0.0); }
};

// Glorot-uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor2D& w, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// ---------------------------------------------------------------------------
// Layers. Each layer owns its Parameters, caches what forward computed, and
// backward() consumes the upstream gradient, accumulates parameter gradients
// and returns the gradient w.r.t. its input.
// ---------------------------------------------------------------------------

class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng);

    Tensor2D forward(const Tensor2D& x);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters();
    std::size_t in_dim() const { return weight.value.rows(); }
    std::size_t out_dim() const { return weight.value.cols(); }

    Parameter weight;  // in_dim x out_dim
    Parameter bias;    // 1 x out_dim

private:
    Tensor2D input_;
};

class Relu {
public:
    Tensor2D forward(const Tensor2D& x);
    Tensor2D backward(const Tensor2D& grad_out);

private:
    Tensor2D input_;
};

// Stack of affine layers with a rectifier between consecutive layers and no
// activation after the last.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::string& name, const std::vector<std::size_t>& dims, Rng& rng);
    // Identity map of the given width; single layer, no trainable signal.
    static Mlp identity(std::size_t dim);

    Tensor2D forward(const Tensor2D& x);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters();
    std::size_t in_dim() const { return layers_.front().in_dim(); }
    std::size_t out_dim() const { return layers_.back().out_dim(); }

private:
    std::vector<Linear> layers_;
    std::vector<Relu> activations_;
};

// row v of output = MLP((1+eps) * x_v + sum_{u in N(v)} x_u).
class GinConv {
public:
    GinConv() = default;
    GinConv(const std::string& name, std::size_t in_dim, std::size_t hidden_dim, Rng& rng);

    Tensor2D forward(const Tensor2D& x, const Adjacency& adj);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return mlp.parameters(); }

    double eps = 0.0;  // fixed, not trained
    Mlp mlp;

private:
    const Adjacency* adj_ = nullptr;
};

// Symmetric-normalized convolution with self-loops:
// row v = sum_{u in N(v) + {v}} x_u W / sqrt((deg(v)+1)(deg(u)+1)).
class GcnConv {
public:
    GcnConv() = default;
    GcnConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng);

    Tensor2D forward(const Tensor2D& x, const Adjacency& adj);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return {&weight}; }

    Parameter weight;

private:
    const Adjacency* adj_ = nullptr;
    Tensor2D propagated_;  // normalized aggregation of the input
};

// row v = x_v W_self + mean_{u in N(v)}(x_u) W_neigh; empty mean is zero.
class SageConv {
public:
    SageConv() = default;
    SageConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng);

    Tensor2D forward(const Tensor2D& x, const Adjacency& adj);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return {&w_self, &w_neigh}; }

    Parameter w_self;
    Parameter w_neigh;

private:
    const Adjacency* adj_ = nullptr;
    Tensor2D input_;
    Tensor2D neighbor_mean_;
};

// Single-head additive attention over N(v) + {v}, leaky rectifier slope 0.2
// on the attention logits, softmax per destination node.
// attn is (2*out_dim) x 1: the first out_dim entries score the destination,
// the last out_dim the source.
class GatConv {
public:
    GatConv() = default;
    GatConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng);

    Tensor2D forward(const Tensor2D& x, const Adjacency& adj);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return {&weight, &attn}; }

    Parameter weight;
    Parameter attn;

    static constexpr double kLeakySlope = 0.2;

private:
    const Adjacency* adj_ = nullptr;
    Tensor2D input_;
    Tensor2D transformed_;          // X W
    std::vector<int> targets_;      // flattened neighborhoods (self first)
    std::vector<int> nbr_offsets_;  // per destination into targets_
    std::vector<double> pre_;       // attention logits before leaky rectifier
    std::vector<double> alpha_;     // softmaxed attention weights
};

// Graph-level readout z_g = sum_i alpha_i h_i with alpha = softmax over the
// learned per-node gate scores within each graph.
class AttentionPool {
public:
    AttentionPool() = default;
    AttentionPool(const std::string& name, std::size_t dim, Rng& rng);

    // Returns num_graphs x dim. Per-graph attention weights are kept and
    // exposed via alphas().
    Tensor2D forward(const Tensor2D& h, const std::vector<int>& membership, int num_graphs);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return {&gate_weight, &gate_bias}; }
    const std::vector<double>& alphas() const { return alpha_; }

    Parameter gate_weight;  // dim x 1
    Parameter gate_bias;    // 1 x 1

private:
    Tensor2D input_;
    std::vector<int> membership_;
    int num_graphs_ = 0;
    std::vector<double> alpha_;
};

// Per-graph column-wise maximum.
class MaxPool {
public:
    Tensor2D forward(const Tensor2D& h, const std::vector<int>& membership, int num_graphs);
    Tensor2D backward(const Tensor2D& grad_out);

private:
    std::size_t in_rows_ = 0;
    std::vector<int> argmax_;  // num_graphs x cols, row index of the max
};

// Batch normalization over rows with trainable per-feature scale/shift.
// Train mode normalizes by the biased batch variance and updates the running
// stats; eval mode normalizes by the running stats.
class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(const std::string& name, std::size_t dim);

    Tensor2D forward(const Tensor2D& x, Mode mode);
    Tensor2D backward(const Tensor2D& grad_out);

    std::vector<Parameter*> parameters() { return {&gamma, &beta}; }

    Parameter gamma;  // 1 x dim
    Parameter beta;   // 1 x dim
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;
    double epsilon = 1e-5;

private:
    Mode mode_ = Mode::Eval;
    Tensor2D xhat_;
    std::vector<double> inv_std_;
};

// Inverted dropout: zero entries with probability `rate` in train mode and
// scale survivors by 1/(1-rate); identity in eval mode.
class Dropout {
public:
    explicit Dropout(double rate = 0.5);

    Tensor2D forward(const Tensor2D& x, Mode mode, Rng& rng);
    Tensor2D backward(const Tensor2D& grad_out);

    double rate() const { return rate_; }

private:
    double rate_;
    bool identity_ = true;
    Tensor2D mask_;  // survivor scale factors
};

// Functional form: deterministic for a fixed seed.
Tensor2D dropout(const Tensor2D& x, double rate, std::uint64_t seed, Mode mode);

// Functional global max pool (no backward state).
Tensor2D global_max_pool(const Tensor2D& h, const std::vector<int>& membership,
                         int num_graphs);

// Numerically stable row-wise softmax.
Tensor2D softmax_rows(const Tensor2D& logits);

// Mean over rows of -ln(max(prob of true class, 1e-12)).
double cross_entropy(const Tensor2D& probs, const std::vector<int>& labels);

// Gradient of cross_entropy(softmax_rows(logits), labels) w.r.t. the logits:
// (probs - onehot) / num_rows.
Tensor2D softmax_cross_entropy_backward(const Tensor2D& probs,
                                        const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

struct GradCheckReport {
    bool passed = true;
    std::size_t samples = 0;
    std::size_t skipped = 0;  // coordinates rejected by the kink test
    double worst_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central-difference check of analytic gradients. `loss` re-evaluates the
// (deterministic) scalar objective; `compute_grads` runs one forward/backward
// filling every Parameter's grad. Samples up to `max_samples` coordinates
// (all of them when fewer exist). Relative error per coordinate is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           const std::vector<Parameter*>& params,
                           double epsilon, double tolerance, std::uint64_t seed,
                           std::size_t max_samples = 100);

// Throws CheckError describing the worst coordinate if the report failed.
void require_grad_check(const GradCheckReport& report);

} // namespace newsprop
