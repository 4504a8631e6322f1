#include "newsprop/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace newsprop {

void glorot_init(Tensor2D& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data()) v = (rng.uniform01() * 2.0 - 1.0) * a;
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

Linear::Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(name + ".weight", in_dim, out_dim, true),
      bias(name + ".bias", 1, out_dim, false) {
    glorot_init(weight.value, in_dim, out_dim, rng);
}

Tensor2D Linear::forward(const Tensor2D& x) {
    input_ = x;
    Tensor2D out = matmul(x, weight.value);
    add_bias_rows(out, bias.value);
    return out;
}

Tensor2D Linear::backward(const Tensor2D& grad_out) {
    add_inplace(weight.grad, matmul_at_b(input_, grad_out));
    add_inplace(bias.grad, column_sums(grad_out));
    return matmul_a_bt(grad_out, weight.value);
}

std::vector<Parameter*> Linear::parameters() { return {&weight, &bias}; }

// ---------------------------------------------------------------------------
// Relu
// ---------------------------------------------------------------------------

Tensor2D Relu::forward(const Tensor2D& x) {
    input_ = x;
    Tensor2D out = x;
    for (double& v : out.data())
        if (v < 0.0) v = 0.0;
    return out;
}

Tensor2D Relu::backward(const Tensor2D& grad_out) {
    Tensor2D out = grad_out;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (input_.data()[i] <= 0.0) out.data()[i] = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Mlp
// ---------------------------------------------------------------------------

Mlp::Mlp(const std::string& name, const std::vector<std::size_t>& dims, Rng& rng) {
    if (dims.size() < 2)
        throw DataError("ShapeMismatch", "MLP needs at least one layer");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        layers_.emplace_back(name + ".l" + std::to_string(i), dims[i], dims[i + 1], rng);
    activations_.resize(layers_.size() - 1);
}

Mlp Mlp::identity(std::size_t dim) {
    Mlp mlp;
    Parameter w("identity.weight", dim, dim, true);
    for (std::size_t i = 0; i < dim; ++i) w.value(i, i) = 1.0;
    Linear layer;
    layer.weight = std::move(w);
    layer.bias = Parameter("identity.bias", 1, dim, false);
    mlp.layers_.push_back(std::move(layer));
    return mlp;
}

Tensor2D Mlp::forward(const Tensor2D& x) {
    Tensor2D h = layers_[0].forward(x);
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        h = activations_[i - 1].forward(h);
        h = layers_[i].forward(h);
    }
    return h;
}

Tensor2D Mlp::backward(const Tensor2D& grad_out) {
    Tensor2D g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        g = layers_[i].backward(g);
        if (i > 0) g = activations_[i - 1].backward(g);
    }
    return g;
}

std::vector<Parameter*> Mlp::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : layers_)
        for (auto* p : layer.parameters()) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------
// GinConv
// ---------------------------------------------------------------------------

namespace {

void check_node_rows(const Tensor2D& x, const Adjacency& adj, const char* where) {
    if (x.rows() + 1 != adj.offsets.size())
        throw DataError("ShapeMismatch",
                        std::string(where) + ": feature rows " + std::to_string(x.rows()) +
                            " vs " + std::to_string(adj.offsets.size() - 1) + " nodes");
}

// out[v] = scale * x[v] + sum_{u in N(v)} x[u]
Tensor2D aggregate_scaled_self_plus_neighbors(const Tensor2D& x, const Adjacency& adj,
                                              double scale) {
    Tensor2D out(x.rows(), x.cols(), 0.0);
    for (std::size_t v = 0; v < x.rows(); ++v) {
        double* dst = out.row(v);
        const double* self = x.row(v);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = scale * self[j];
        for (const int* u = adj.begin(static_cast<int>(v)); u != adj.end(static_cast<int>(v)); ++u) {
            const double* src = x.row(static_cast<std::size_t>(*u));
            for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += src[j];
        }
    }
    return out;
}

} // namespace

GinConv::GinConv(const std::string& name, std::size_t in_dim, std::size_t hidden_dim, Rng& rng)
    : mlp(name + ".mlp", {in_dim, hidden_dim, hidden_dim}, rng) {}

Tensor2D GinConv::forward(const Tensor2D& x, const Adjacency& adj) {
    check_node_rows(x, adj, "gin_conv");
    adj_ = &adj;
    return mlp.forward(aggregate_scaled_self_plus_neighbors(x, adj, 1.0 + eps));
}

Tensor2D GinConv::backward(const Tensor2D& grad_out) {
    // d/dX of (1+eps) X + A X is (1+eps) G + A^T G; A is symmetric here.
    const Tensor2D grad_sum = mlp.backward(grad_out);
    return aggregate_scaled_self_plus_neighbors(grad_sum, *adj_, 1.0 + eps);
}

// ---------------------------------------------------------------------------
// GcnConv
// ---------------------------------------------------------------------------

namespace {

// out[v] = sum_{u in N(v)+{v}} x[u] / sqrt((deg(v)+1)(deg(u)+1))
Tensor2D gcn_propagate(const Tensor2D& x, const Adjacency& adj) {
    Tensor2D out(x.rows(), x.cols(), 0.0);
    for (std::size_t v = 0; v < x.rows(); ++v) {
        const double dv = std::sqrt(static_cast<double>(adj.degree(static_cast<int>(v)) + 1));
        double* dst = out.row(v);
        const double* self = x.row(v);
        const double self_coef = 1.0 / (dv * dv);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = self_coef * self[j];
        for (const int* u = adj.begin(static_cast<int>(v)); u != adj.end(static_cast<int>(v)); ++u) {
            const double du = std::sqrt(static_cast<double>(adj.degree(*u) + 1));
            const double coef = 1.0 / (dv * du);
            const double* src = x.row(static_cast<std::size_t>(*u));
            for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += coef * src[j];
        }
    }
    return out;
}

} // namespace

GcnConv::GcnConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(name + ".weight", in_dim, out_dim, true) {
    glorot_init(weight.value, in_dim, out_dim, rng);
}

Tensor2D GcnConv::forward(const Tensor2D& x, const Adjacency& adj) {
    check_node_rows(x, adj, "gcn_conv");
    adj_ = &adj;
    propagated_ = gcn_propagate(x, adj);
    return matmul(propagated_, weight.value);
}

Tensor2D GcnConv::backward(const Tensor2D& grad_out) {
    add_inplace(weight.grad, matmul_at_b(propagated_, grad_out));
    // The normalized operator is symmetric, so the input gradient reuses it.
    return gcn_propagate(matmul_a_bt(grad_out, weight.value), *adj_);
}

// ---------------------------------------------------------------------------
// SageConv
// ---------------------------------------------------------------------------

SageConv::SageConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : w_self(name + ".w_self", in_dim, out_dim, true),
      w_neigh(name + ".w_neigh", in_dim, out_dim, true) {
    glorot_init(w_self.value, in_dim, out_dim, rng);
    glorot_init(w_neigh.value, in_dim, out_dim, rng);
}

Tensor2D SageConv::forward(const Tensor2D& x, const Adjacency& adj) {
    check_node_rows(x, adj, "sage_conv");
    adj_ = &adj;
    input_ = x;
    neighbor_mean_ = Tensor2D(x.rows(), x.cols(), 0.0);
    for (std::size_t v = 0; v < x.rows(); ++v) {
        const int deg = adj.degree(static_cast<int>(v));
        if (deg == 0) continue;
        double* dst = neighbor_mean_.row(v);
        for (const int* u = adj.begin(static_cast<int>(v)); u != adj.end(static_cast<int>(v)); ++u) {
            const double* src = x.row(static_cast<std::size_t>(*u));
            for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += src[j];
        }
        const double inv = 1.0 / static_cast<double>(deg);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] *= inv;
    }
    Tensor2D out = matmul(x, w_self.value);
    add_inplace(out, matmul(neighbor_mean_, w_neigh.value));
    return out;
}

Tensor2D SageConv::backward(const Tensor2D& grad_out) {
    add_inplace(w_self.grad, matmul_at_b(input_, grad_out));
    add_inplace(w_neigh.grad, matmul_at_b(neighbor_mean_, grad_out));

    Tensor2D grad_x = matmul_a_bt(grad_out, w_self.value);
    // Mean aggregation transposed: node u receives grad_mean[v]/deg(v) from
    // every v it neighbors.
    const Tensor2D grad_mean = matmul_a_bt(grad_out, w_neigh.value);
    for (std::size_t v = 0; v < grad_mean.rows(); ++v) {
        const int deg = adj_->degree(static_cast<int>(v));
        if (deg == 0) continue;
        const double inv = 1.0 / static_cast<double>(deg);
        const double* src = grad_mean.row(v);
        for (const int* u = adj_->begin(static_cast<int>(v)); u != adj_->end(static_cast<int>(v)); ++u) {
            double* dst = grad_x.row(static_cast<std::size_t>(*u));
            for (std::size_t j = 0; j < grad_mean.cols(); ++j) dst[j] += inv * src[j];
        }
    }
    return grad_x;
}

// ---------------------------------------------------------------------------
// GatConv
// ---------------------------------------------------------------------------

GatConv::GatConv(const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(name + ".weight", in_dim, out_dim, true),
      attn(name + ".attn", 2 * out_dim, 1, true) {
    glorot_init(weight.value, in_dim, out_dim, rng);
    glorot_init(attn.value, 2 * out_dim, 1, rng);
}

Tensor2D GatConv::forward(const Tensor2D& x, const Adjacency& adj) {
    check_node_rows(x, adj, "gat_conv");
    adj_ = &adj;
    input_ = x;
    transformed_ = matmul(x, weight.value);
    const std::size_t n = x.rows();
    const std::size_t h = transformed_.cols();
    const double* a_dst = attn.value.data().data();
    const double* a_src = a_dst + h;

    std::vector<double> score_dst(n, 0.0);
    std::vector<double> score_src(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const double* z = transformed_.row(v);
        double sd = 0.0;
        double ss = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            sd += a_dst[j] * z[j];
            ss += a_src[j] * z[j];
        }
        score_dst[v] = sd;
        score_src[v] = ss;
    }

    // Flattened neighborhoods, self edge first then sorted neighbors.
    nbr_offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v)
        nbr_offsets_[v + 1] = nbr_offsets_[v] + adj.degree(static_cast<int>(v)) + 1;
    targets_.resize(static_cast<std::size_t>(nbr_offsets_[n]));
    pre_.resize(targets_.size());
    alpha_.resize(targets_.size());

    Tensor2D out(n, h, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const int begin = nbr_offsets_[v];
        const int end = nbr_offsets_[v + 1];
        targets_[static_cast<std::size_t>(begin)] = static_cast<int>(v);
        int pos = begin + 1;
        for (const int* u = adj.begin(static_cast<int>(v)); u != adj.end(static_cast<int>(v)); ++u)
            targets_[static_cast<std::size_t>(pos++)] = *u;

        double max_logit = -std::numeric_limits<double>::infinity();
        for (int k = begin; k < end; ++k) {
            const double pre = score_dst[v] + score_src[static_cast<std::size_t>(targets_[static_cast<std::size_t>(k)])];
            pre_[static_cast<std::size_t>(k)] = pre;
            const double act = pre > 0.0 ? pre : kLeakySlope * pre;
            alpha_[static_cast<std::size_t>(k)] = act;
            max_logit = std::max(max_logit, act);
        }
        double denom = 0.0;
        for (int k = begin; k < end; ++k) {
            const double e = std::exp(alpha_[static_cast<std::size_t>(k)] - max_logit);
            alpha_[static_cast<std::size_t>(k)] = e;
            denom += e;
        }
        double* dst = out.row(v);
        for (int k = begin; k < end; ++k) {
            const double a = alpha_[static_cast<std::size_t>(k)] / denom;
            alpha_[static_cast<std::size_t>(k)] = a;
            const double* z = transformed_.row(static_cast<std::size_t>(targets_[static_cast<std::size_t>(k)]));
            for (std::size_t j = 0; j < h; ++j) dst[j] += a * z[j];
        }
    }
    return out;
}

Tensor2D GatConv::backward(const Tensor2D& grad_out) {
    const std::size_t n = input_.rows();
    const std::size_t h = transformed_.cols();
    const double* a_dst = attn.value.data().data();
    const double* a_src = a_dst + h;
    double* ga_dst = attn.grad.data().data();
    double* ga_src = ga_dst + h;

    Tensor2D grad_z(n, h, 0.0);
    std::vector<double> grad_score_dst(n, 0.0);
    std::vector<double> grad_score_src(n, 0.0);

    for (std::size_t v = 0; v < n; ++v) {
        const int begin = nbr_offsets_[v];
        const int end = nbr_offsets_[v + 1];
        const double* gout = grad_out.row(v);

        // d alpha_k = <gout, z_k>; softmax jacobian gives d pre.
        double weighted = 0.0;  // sum_k alpha_k * dalpha_k
        std::vector<double> dalpha(static_cast<std::size_t>(end - begin));
        for (int k = begin; k < end; ++k) {
            const double* z = transformed_.row(static_cast<std::size_t>(targets_[static_cast<std::size_t>(k)]));
            double d = 0.0;
            for (std::size_t j = 0; j < h; ++j) d += gout[j] * z[j];
            dalpha[static_cast<std::size_t>(k - begin)] = d;
            weighted += alpha_[static_cast<std::size_t>(k)] * d;
        }
        for (int k = begin; k < end; ++k) {
            const auto u = static_cast<std::size_t>(targets_[static_cast<std::size_t>(k)]);
            const double a = alpha_[static_cast<std::size_t>(k)];

            // value path: out_v += alpha * z_u
            double* gz = grad_z.row(u);
            for (std::size_t j = 0; j < h; ++j) gz[j] += a * gout[j];

            // attention path
            const double de = a * (dalpha[static_cast<std::size_t>(k - begin)] - weighted);
            const double dpre = pre_[static_cast<std::size_t>(k)] > 0.0 ? de : kLeakySlope * de;
            grad_score_dst[v] += dpre;
            grad_score_src[u] += dpre;
        }
    }

    // score_dst[v] = <a_dst, z_v>, score_src[u] = <a_src, z_u>
    for (std::size_t v = 0; v < n; ++v) {
        const double* z = transformed_.row(v);
        double* gz = grad_z.row(v);
        const double gd = grad_score_dst[v];
        const double gs = grad_score_src[v];
        for (std::size_t j = 0; j < h; ++j) {
            gz[j] += gd * a_dst[j] + gs * a_src[j];
            ga_dst[j] += gd * z[j];
            ga_src[j] += gs * z[j];
        }
    }

    add_inplace(weight.grad, matmul_at_b(input_, grad_z));
    return matmul_a_bt(grad_z, weight.value);
}

// ---------------------------------------------------------------------------
// AttentionPool
// ---------------------------------------------------------------------------

namespace {

std::vector<int> graph_node_counts(const std::vector<int>& membership, int num_graphs,
                                   const char* where) {
    std::vector<int> counts(static_cast<std::size_t>(num_graphs), 0);
    int prev = 0;
    for (int m : membership) {
        if (m < prev || m >= num_graphs)
            throw DataError("ShapeMismatch",
                            std::string(where) + ": membership is not a non-decreasing "
                                                 "block structure");
        ++counts[static_cast<std::size_t>(m)];
        prev = m;
    }
    for (int g = 0; g < num_graphs; ++g)
        if (counts[static_cast<std::size_t>(g)] == 0)
            throw DataError("EmptyGraphInBatch",
                            std::string(where) + ": graph " + std::to_string(g) +
                                " has no nodes");
    return counts;
}

} // namespace

AttentionPool::AttentionPool(const std::string& name, std::size_t dim, Rng& rng)
    : gate_weight(name + ".gate_weight", dim, 1, true),
      gate_bias(name + ".gate_bias", 1, 1, false) {
    glorot_init(gate_weight.value, dim, 1, rng);
}

Tensor2D AttentionPool::forward(const Tensor2D& h, const std::vector<int>& membership,
                                int num_graphs) {
    if (membership.size() != h.rows())
        throw DataError("ShapeMismatch", "attention_pool: membership length " +
                                             std::to_string(membership.size()) + " vs " +
                                             std::to_string(h.rows()) + " rows");
    graph_node_counts(membership, num_graphs, "attention_pool");
    input_ = h;
    membership_ = membership;
    num_graphs_ = num_graphs;

    const std::size_t n = h.rows();
    const std::size_t d = h.cols();
    const double* w = gate_weight.value.data().data();
    const double b = gate_bias.value(0, 0);

    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = h.row(i);
        double s = b;
        for (std::size_t j = 0; j < d; ++j) s += row[j] * w[j];
        score[i] = s;
    }

    alpha_.assign(n, 0.0);
    std::vector<double> max_score(static_cast<std::size_t>(num_graphs),
                                  -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        auto g = static_cast<std::size_t>(membership[i]);
        max_score[g] = std::max(max_score[g], score[i]);
    }
    std::vector<double> denom(static_cast<std::size_t>(num_graphs), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = static_cast<std::size_t>(membership[i]);
        alpha_[i] = std::exp(score[i] - max_score[g]);
        denom[g] += alpha_[i];
    }
    Tensor2D out(static_cast<std::size_t>(num_graphs), d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = static_cast<std::size_t>(membership[i]);
        alpha_[i] /= denom[g];
        double* dst = out.row(g);
        const double* row = h.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += alpha_[i] * row[j];
    }
    return out;
}

Tensor2D AttentionPool::backward(const Tensor2D& grad_out) {
    const std::size_t n = input_.rows();
    const std::size_t d = input_.cols();
    const double* w = gate_weight.value.data().data();
    double* gw = gate_weight.grad.data().data();

    // dalpha_i = <grad_out[g], h_i>, then per-graph softmax jacobian.
    std::vector<double> dalpha(n);
    std::vector<double> weighted(static_cast<std::size_t>(num_graphs_), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = static_cast<std::size_t>(membership_[i]);
        const double* go = grad_out.row(g);
        const double* row = input_.row(i);
        double dv = 0.0;
        for (std::size_t j = 0; j < d; ++j) dv += go[j] * row[j];
        dalpha[i] = dv;
        weighted[g] += alpha_[i] * dv;
    }

    Tensor2D grad_h(n, d, 0.0);
    double gbias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto g = static_cast<std::size_t>(membership_[i]);
        const double* go = grad_out.row(g);
        const double* row = input_.row(i);
        double* gh = grad_h.row(i);
        const double dscore = alpha_[i] * (dalpha[i] - weighted[g]);
        for (std::size_t j = 0; j < d; ++j) {
            gh[j] = alpha_[i] * go[j] + dscore * w[j];
            gw[j] += dscore * row[j];
        }
        gbias += dscore;
    }
    gate_bias.grad(0, 0) += gbias;
    return grad_h;
}

// ---------------------------------------------------------------------------
// MaxPool
// ---------------------------------------------------------------------------

Tensor2D MaxPool::forward(const Tensor2D& h, const std::vector<int>& membership,
                          int num_graphs) {
    if (membership.size() != h.rows())
        throw DataError("ShapeMismatch", "global_max_pool: membership length " +
                                             std::to_string(membership.size()) + " vs " +
                                             std::to_string(h.rows()) + " rows");
    graph_node_counts(membership, num_graphs, "global_max_pool");
    in_rows_ = h.rows();
    const std::size_t d = h.cols();
    Tensor2D out(static_cast<std::size_t>(num_graphs), d,
                 -std::numeric_limits<double>::infinity());
    argmax_.assign(static_cast<std::size_t>(num_graphs) * d, -1);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto g = static_cast<std::size_t>(membership[i]);
        const double* row = h.row(i);
        double* dst = out.row(g);
        for (std::size_t j = 0; j < d; ++j) {
            if (argmax_[g * d + j] < 0 || row[j] > dst[j]) {
                dst[j] = row[j];
                argmax_[g * d + j] = static_cast<int>(i);
            }
        }
    }
    return out;
}

Tensor2D MaxPool::backward(const Tensor2D& grad_out) {
    Tensor2D grad_h(in_rows_, grad_out.cols(), 0.0);
    for (std::size_t g = 0; g < grad_out.rows(); ++g)
        for (std::size_t j = 0; j < grad_out.cols(); ++j)
            grad_h(static_cast<std::size_t>(argmax_[g * grad_out.cols() + j]), j) +=
                grad_out(g, j);
    return grad_h;
}

Tensor2D global_max_pool(const Tensor2D& h, const std::vector<int>& membership,
                         int num_graphs) {
    MaxPool pool;
    return pool.forward(h, membership, num_graphs);
}

// ---------------------------------------------------------------------------
// BatchNorm
// ---------------------------------------------------------------------------

BatchNorm::BatchNorm(const std::string& name, std::size_t dim)
    : gamma(name + ".gamma", 1, dim, false), beta(name + ".beta", 1, dim, false),
      running_mean(dim, 0.0), running_var(dim, 1.0) {
    gamma.value.fill(1.0);
}

Tensor2D BatchNorm::forward(const Tensor2D& x, Mode mode) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (d != running_mean.size())
        throw DataError("ShapeMismatch", "batchnorm: " + std::to_string(d) +
                                             " columns vs " +
                                             std::to_string(running_mean.size()) +
                                             " features");
    mode_ = mode;
    xhat_ = Tensor2D(n, d);
    inv_std_.assign(d, 0.0);

    if (mode == Mode::Train) {
        if (n < 2)
            throw DataError("SingleRowTrainBatch",
                            "batchnorm train mode needs at least 2 rows, got " +
                                std::to_string(n));
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = x(i, j) - mean;
                var += c * c;
            }
            var /= static_cast<double>(n);  // biased, used for normalization
            inv_std_[j] = 1.0 / std::sqrt(var + epsilon);
            for (std::size_t i = 0; i < n; ++i) xhat_(i, j) = (x(i, j) - mean) * inv_std_[j];

            // Running stats use the unbiased variance estimate.
            const double unbiased = var * static_cast<double>(n) / static_cast<double>(n - 1);
            running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mean;
            running_var[j] = (1.0 - momentum) * running_var[j] + momentum * unbiased;
        }
    } else {
        for (std::size_t j = 0; j < d; ++j) {
            inv_std_[j] = 1.0 / std::sqrt(running_var[j] + epsilon);
            for (std::size_t i = 0; i < n; ++i)
                xhat_(i, j) = (x(i, j) - running_mean[j]) * inv_std_[j];
        }
    }

    Tensor2D out(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        const double g = gamma.value(0, j);
        const double b = beta.value(0, j);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = g * xhat_(i, j) + b;
    }
    return out;
}

Tensor2D BatchNorm::backward(const Tensor2D& grad_out) {
    const std::size_t n = grad_out.rows();
    const std::size_t d = grad_out.cols();
    Tensor2D grad_x(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        const double g = gamma.value(0, j);
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = grad_out(i, j);
            sum_dy += dy;
            sum_dy_xhat += dy * xhat_(i, j);
        }
        gamma.grad(0, j) += sum_dy_xhat;
        beta.grad(0, j) += sum_dy;

        if (mode_ == Mode::Train) {
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double dxhat = grad_out(i, j) * g;
                grad_x(i, j) = inv_std_[j] *
                               (dxhat - inv_n * (g * sum_dy + xhat_(i, j) * g * sum_dy_xhat));
            }
        } else {
            // Running stats are constants in eval mode.
            for (std::size_t i = 0; i < n; ++i)
                grad_x(i, j) = grad_out(i, j) * g * inv_std_[j];
        }
    }
    return grad_x;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

Dropout::Dropout(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0)
        throw DataError("RateOutOfRange",
                        "dropout rate must be in [0, 1), got " + std::to_string(rate));
}

Tensor2D Dropout::forward(const Tensor2D& x, Mode mode, Rng& rng) {
    if (mode == Mode::Eval || rate_ == 0.0) {
        identity_ = true;
        return x;
    }
    identity_ = false;
    const double keep = 1.0 - rate_;
    const double scale = 1.0 / keep;
    mask_ = Tensor2D(x.rows(), x.cols());
    Tensor2D out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = rng.uniform01() >= rate_ ? scale : 0.0;
        mask_.data()[i] = m;
        out.data()[i] = x.data()[i] * m;
    }
    return out;
}

Tensor2D Dropout::backward(const Tensor2D& grad_out) {
    if (identity_) return grad_out;
    Tensor2D out = grad_out;
    hadamard_inplace(out, mask_);
    return out;
}

Tensor2D dropout(const Tensor2D& x, double rate, std::uint64_t seed, Mode mode) {
    Dropout layer(rate);
    Rng rng(seed);
    return layer.forward(x, mode, rng);
}

// ---------------------------------------------------------------------------
// Softmax / cross-entropy
// ---------------------------------------------------------------------------

Tensor2D softmax_rows(const Tensor2D& logits) {
    Tensor2D out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* in = logits.row(i);
        double* dst = out.row(i);
        double max_v = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < logits.cols(); ++j) max_v = std::max(max_v, in[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            dst[j] = std::exp(in[j] - max_v);
            denom += dst[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) dst[j] /= denom;
    }
    return out;
}

double cross_entropy(const Tensor2D& probs, const std::vector<int>& labels) {
    if (labels.size() != probs.rows())
        throw DataError("ShapeMismatch", "cross_entropy: " + std::to_string(labels.size()) +
                                             " labels vs " + std::to_string(probs.rows()) +
                                             " rows");
    constexpr double kFloor = 1e-12;
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols())
            throw DataError("LabelOutOfRange", "label " + std::to_string(y) + " at row " +
                                                   std::to_string(i) + " exceeds " +
                                                   std::to_string(probs.cols()) + " classes");
        loss -= std::log(std::max(probs(i, static_cast<std::size_t>(y)), kFloor));
    }
    return loss / static_cast<double>(probs.rows());
}

Tensor2D softmax_cross_entropy_backward(const Tensor2D& probs,
                                        const std::vector<int>& labels) {
    Tensor2D grad = probs;
    const double inv_n = 1.0 / static_cast<double>(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        grad(i, static_cast<std::size_t>(labels[i])) -= 1.0;
        for (std::size_t j = 0; j < probs.cols(); ++j) grad(i, j) *= inv_n;
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           const std::vector<Parameter*>& params,
                           double epsilon, double tolerance, std::uint64_t seed,
                           std::size_t max_samples) {
    GradCheckReport report;
    std::size_t total = 0;
    for (const auto* p : params) total += p->value.size();
    if (total == 0) return report;  // vacuous pass

    compute_grads();
    std::vector<Tensor2D> analytic;
    analytic.reserve(params.size());
    for (const auto* p : params) analytic.push_back(p->grad);
    const double base = loss();

    // Candidate coordinates in a seeded uniform-random order; sampling walks
    // the list until max_samples coordinates were actually checked, so
    // kink-skipped ones are replaced by later candidates.
    std::vector<std::size_t> coords(total);
    for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    if (total > max_samples) {
        Rng rng(seed);
        rng.shuffle(coords);
    }

    for (std::size_t flat : coords) {
        if (report.samples >= max_samples && total > max_samples) break;
        std::size_t pi = 0;
        std::size_t off = flat;
        while (off >= params[pi]->value.size()) {
            off -= params[pi]->value.size();
            ++pi;
        }
        double& theta = params[pi]->value.data()[off];
        const double saved = theta;

        theta = saved + epsilon;
        const double plus = loss();
        theta = saved - epsilon;
        const double minus = loss();
        theta = saved;

        const double fwd = (plus - base) / epsilon;
        const double bwd = (base - minus) / epsilon;
        const double a = analytic[pi].data()[off];

        // Finite differences of a 64-bit loss carry rounding noise of a few
        // ulp(loss)/epsilon. Where the analytic gradient and both one-sided
        // differences all sit below that floor, the two sides agree at
        // measurement precision: the derivative is zero as far as a finite
        // difference can tell. An analytic value above the floor is never
        // excused this way.
        const double noise_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, std::abs(base)) / epsilon;
        if (std::abs(a) <= noise_floor && std::abs(fwd) <= noise_floor &&
            std::abs(bwd) <= noise_floor) {
            ++report.samples;
            continue;
        }

        // A piecewise-linear kink (rectifier, max pool) inside the +-epsilon
        // window makes the central difference measure a slope average, not
        // the derivative; the resulting error is half the gap between the
        // one-sided differences. Coordinates whose gap could move the
        // verdict by more than half the tolerance are rejected. The test
        // uses no analytic values, so a wrong gradient cannot talk its way
        // out of being checked.
        if (std::abs(fwd - bwd) >
            0.5 * tolerance * std::max({std::abs(fwd), std::abs(bwd), 1e-8})) {
            ++report.skipped;
            continue;
        }

        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double rel = std::abs(a - numeric) /
                           std::max({std::abs(a), std::abs(numeric), 1e-8});
        ++report.samples;
        if (rel > report.worst_rel_err) {
            report.worst_rel_err = rel;
            report.worst_param = params[pi]->name;
            report.worst_index = off;
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
        if (rel >= tolerance) report.passed = false;
    }
    return report;
}

void require_grad_check(const GradCheckReport& report) {
    if (!report.passed)
        throw CheckError("CheckFailed",
                         "gradient mismatch at " + report.worst_param + "[" +
                             std::to_string(report.worst_index) + "]: analytic " +
                             std::to_string(report.worst_analytic) + " vs numeric " +
                             std::to_string(report.worst_numeric) + " (rel err " +
                             std::to_string(report.worst_rel_err) + ")");
}

} // namespace newsprop
