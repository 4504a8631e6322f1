#include "newsprop/gradcheck.hpp"

#include <cmath>
#include <vector>

#include "newsprop/model.hpp"
#include "newsprop/synth.hpp"
#include "newsprop/topo.hpp"

namespace newsprop {

namespace {

Tensor2D random_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor2D out(rows, cols);
    for (double& v : out.data()) v = rng.normal();
    return out;
}

double weighted_sum(const Tensor2D& t, const Tensor2D& c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) sum += t.data()[i] * c.data()[i];
    return sum;
}

// For a parameter whose true gradient is identically zero: assert the
// accumulated analytic gradient is zero up to summation rounding. The
// caller must have run a backward pass already.
GradCheckCase zero_grad_case(const std::string& case_name, const Parameter& param) {
    GradCheckReport report;
    report.samples = param.grad.size();
    report.worst_param = param.name;
    report.worst_numeric = 0.0;
    double worst = -1.0;
    for (std::size_t i = 0; i < param.grad.size(); ++i) {
        const double g = param.grad.data()[i];
        if (std::abs(g) > worst) {
            worst = std::abs(g);
            report.worst_rel_err = std::abs(g);
            report.worst_analytic = g;
            report.worst_index = i;
        }
    }
    report.passed = worst <= 1e-12;
    return {case_name, report};
}

// Small graph with triangles, a bridge, and a leaf; exercises every
// aggregation branch.
PropagationGraph toy_graph(std::size_t feat_dim, Rng& rng) {
    PropagationGraph g;
    g.id = "toy";
    g.num_nodes = 7;
    g.edges = {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 6}, {3, 4}, {3, 5}, {4, 5}};
    g.features = random_tensor(7, feat_dim, rng);
    g.root = 0;
    g.label = 1;
    return g;
}

template <typename Layer>
GradCheckCase conv_case(const std::string& name, Layer&& layer, std::size_t in_dim,
                        std::size_t out_dim, std::uint64_t seed, double epsilon,
                        double tolerance, std::size_t max_samples, Rng& rng) {
    const PropagationGraph g = toy_graph(in_dim, rng);
    const Adjacency adj = build_adjacency(g.num_nodes, g.edges);
    const Tensor2D x = g.features;
    const Tensor2D c = random_tensor(x.rows(), out_dim, rng);
    auto loss = [&] { return weighted_sum(layer.forward(x, adj), c); };
    auto grads = [&] {
        for (auto* p : layer.parameters()) p->zero_grad();
        layer.forward(x, adj);
        layer.backward(c);
    };
    return {name, grad_check(loss, grads, layer.parameters(), epsilon, tolerance, seed,
                             max_samples)};
}

GradCheckCase model_case(ModelKind kind, std::uint64_t seed, double epsilon,
                         double tolerance, std::size_t max_samples) {
    SynthConfig sc;
    sc.graphs_per_class = 2;
    sc.min_nodes = 5;
    sc.max_nodes = 8;
    sc.feat_dim = 6;
    sc.structure_signal = 0.3;
    sc.feature_signal = 0.5;
    sc.base_closure = 0.2;
    sc.seed = mix_seed(seed, 70);
    const GraphDataset ds = generate(sc);

    ModelConfig mc;
    mc.kind = kind;
    mc.feat_dim = sc.feat_dim;
    mc.hidden_dim = 8;
    mc.dropout_rate = 0.0;
    mc.concat_news = kind == ModelKind::Sage;  // covers the concat path once

    Rng init(mix_seed(seed, 71));
    auto model = make_model(mc, init);

    std::vector<PropagationGraph> inputs;
    for (const auto& g : ds.graphs)
        inputs.push_back(kind == ModelKind::BetterGnn ? augment_features(g) : g);
    const BatchedGraph batch = batch_graphs(inputs);

    Rng scratch(0);
    if (kind == ModelKind::BetterGnn)
        model->forward(batch, Mode::Train, scratch);  // give running stats real values

    auto loss = [&] {
        return cross_entropy(model->forward(batch, Mode::Eval, scratch), batch.labels);
    };
    auto grads = [&] {
        model->zero_grads();
        model->forward(batch, Mode::Eval, scratch);
        model->backward(batch.labels);
    };
    return {"model_" + model_kind_name(kind),
            grad_check(loss, grads, model->parameters(), epsilon, tolerance,
                       mix_seed(seed, 72), max_samples)};
}

} // namespace

std::vector<GradCheckCase> run_standard_grad_checks(std::uint64_t seed, double epsilon,
                                                    double tolerance,
                                                    std::size_t max_samples) {
    std::vector<GradCheckCase> out;

    {
        Rng rng(mix_seed(seed, 1));
        Linear layer("linear", 4, 3, rng);
        const Tensor2D x = random_tensor(5, 4, rng);
        const Tensor2D c = random_tensor(5, 3, rng);
        auto loss = [&] { return weighted_sum(layer.forward(x), c); };
        auto grads = [&] {
            for (auto* p : layer.parameters()) p->zero_grad();
            layer.forward(x);
            layer.backward(c);
        };
        out.push_back({"linear", grad_check(loss, grads, layer.parameters(), epsilon,
                                            tolerance, mix_seed(seed, 101), max_samples)});
    }
    {
        Rng rng(mix_seed(seed, 2));
        Mlp mlp("mlp", {4, 6, 3}, rng);
        const Tensor2D x = random_tensor(5, 4, rng);
        const Tensor2D c = random_tensor(5, 3, rng);
        auto loss = [&] { return weighted_sum(mlp.forward(x), c); };
        auto grads = [&] {
            for (auto* p : mlp.parameters()) p->zero_grad();
            mlp.forward(x);
            mlp.backward(c);
        };
        out.push_back({"mlp", grad_check(loss, grads, mlp.parameters(), epsilon, tolerance,
                                         mix_seed(seed, 102), max_samples)});
    }
    {
        Rng rng(mix_seed(seed, 3));
        out.push_back(conv_case("gin", GinConv("gin", 4, 6, rng), 4, 6, mix_seed(seed, 103),
                                epsilon, tolerance, max_samples, rng));
    }
    {
        Rng rng(mix_seed(seed, 4));
        out.push_back(conv_case("gcn", GcnConv("gcn", 4, 6, rng), 4, 6, mix_seed(seed, 104),
                                epsilon, tolerance, max_samples, rng));
    }
    {
        Rng rng(mix_seed(seed, 5));
        out.push_back(conv_case("sage", SageConv("sage", 4, 6, rng), 4, 6, mix_seed(seed, 105),
                                epsilon, tolerance, max_samples, rng));
    }
    {
        Rng rng(mix_seed(seed, 6));
        out.push_back(conv_case("gat", GatConv("gat", 4, 6, rng), 4, 6, mix_seed(seed, 106),
                                epsilon, tolerance, max_samples, rng));
    }
    {
        Rng rng(mix_seed(seed, 7));
        AttentionPool pool("pool", 5, rng);
        const Tensor2D h = random_tensor(7, 5, rng);
        const std::vector<int> membership = {0, 0, 0, 1, 1, 2, 2};
        const Tensor2D c = random_tensor(3, 5, rng);
        auto loss = [&] { return weighted_sum(pool.forward(h, membership, 3), c); };
        auto grads = [&] {
            for (auto* p : pool.parameters()) p->zero_grad();
            pool.forward(h, membership, 3);
            pool.backward(c);
        };
        out.push_back({"attention_pool",
                       grad_check(loss, grads, pool.parameters(), epsilon, tolerance,
                                  mix_seed(seed, 107), max_samples)});
        // The gate bias shifts every score in a graph equally and the
        // per-graph softmax cancels the shift, so its true gradient is
        // identically zero; assert that directly on top of the finite
        // difference agreement above.
        out.push_back(zero_grad_case("pool_gate_bias_zero", pool.gate_bias));
    }
    {
        Rng rng(mix_seed(seed, 8));
        BatchNorm bn("bn", 3);
        for (std::size_t j = 0; j < 3; ++j) {
            bn.running_mean[j] = rng.normal();
            bn.running_var[j] = 0.5 + rng.uniform01();
            bn.gamma.value(0, j) = 1.0 + 0.2 * rng.normal();
            bn.beta.value(0, j) = 0.2 * rng.normal();
        }
        const Tensor2D x = random_tensor(4, 3, rng);
        const Tensor2D c = random_tensor(4, 3, rng);
        auto loss = [&] { return weighted_sum(bn.forward(x, Mode::Eval), c); };
        auto grads = [&] {
            for (auto* p : bn.parameters()) p->zero_grad();
            bn.forward(x, Mode::Eval);
            bn.backward(c);
        };
        out.push_back({"batchnorm_eval",
                       grad_check(loss, grads, bn.parameters(), epsilon, tolerance,
                                  mix_seed(seed, 108), max_samples)});
    }
    {
        Rng rng(mix_seed(seed, 9));
        BatchNorm bn("bn", 3);
        for (std::size_t j = 0; j < 3; ++j) {
            bn.gamma.value(0, j) = 1.0 + 0.2 * rng.normal();
            bn.beta.value(0, j) = 0.2 * rng.normal();
        }
        const Tensor2D x = random_tensor(6, 3, rng);
        const Tensor2D c = random_tensor(6, 3, rng);
        // Train-mode output depends on batch stats only; the running-stat
        // update is a side effect invisible to the loss.
        auto loss = [&] { return weighted_sum(bn.forward(x, Mode::Train), c); };
        auto grads = [&] {
            for (auto* p : bn.parameters()) p->zero_grad();
            bn.forward(x, Mode::Train);
            bn.backward(c);
        };
        out.push_back({"batchnorm_train",
                       grad_check(loss, grads, bn.parameters(), epsilon, tolerance,
                                  mix_seed(seed, 109), max_samples)});
    }
    {
        Rng rng(mix_seed(seed, 10));
        Linear layer("logits", 4, 2, rng);
        const Tensor2D x = random_tensor(6, 4, rng);
        const std::vector<int> labels = {0, 1, 1, 0, 1, 0};
        auto loss = [&] { return cross_entropy(softmax_rows(layer.forward(x)), labels); };
        auto grads = [&] {
            for (auto* p : layer.parameters()) p->zero_grad();
            const Tensor2D probs = softmax_rows(layer.forward(x));
            layer.backward(softmax_cross_entropy_backward(probs, labels));
        };
        out.push_back({"softmax_xent",
                       grad_check(loss, grads, layer.parameters(), epsilon, tolerance,
                                  mix_seed(seed, 110), max_samples)});
    }

    out.push_back(model_case(ModelKind::BetterGnn, mix_seed(seed, 11), epsilon, tolerance,
                             max_samples));
    out.push_back(model_case(ModelKind::Gcn, mix_seed(seed, 12), epsilon, tolerance,
                             max_samples));
    out.push_back(model_case(ModelKind::Sage, mix_seed(seed, 13), epsilon, tolerance,
                             max_samples));
    out.push_back(model_case(ModelKind::Gat, mix_seed(seed, 14), epsilon, tolerance,
                             max_samples));
    return out;
}

void require_all_passed(const std::vector<GradCheckCase>& cases) {
    for (const auto& c : cases)
        if (!c.report.passed)
            throw CheckError("CheckFailed",
                             "gradient check '" + c.name + "' failed at " +
                                 c.report.worst_param + "[" +
                                 std::to_string(c.report.worst_index) + "]: analytic " +
                                 std::to_string(c.report.worst_analytic) + " vs numeric " +
                                 std::to_string(c.report.worst_numeric));
}

} // namespace newsprop
