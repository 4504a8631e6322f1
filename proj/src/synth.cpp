#include "newsprop/synth.hpp"

#include <algorithm>
#include <cstdio>

#include "newsprop/errors.hpp"
#include "newsprop/rng.hpp"

namespace newsprop {

void SynthConfig::validate() const {
    if (graphs_per_class < 1)
        throw UsageError("BadConfig", "graphs_per_class must be positive");
    if (min_nodes < 2 || max_nodes < min_nodes)
        throw UsageError("BadConfig", "node range must satisfy 2 <= min <= max");
    if (feat_dim == 0)
        throw UsageError("BadConfig", "feat_dim must be positive");
    if (structure_signal < 0.0 || feature_signal < 0.0)
        throw UsageError("BadConfig", "signals must be non-negative");
    if (base_closure < 0.0 || base_closure > 1.0)
        throw UsageError("BadConfig", "base_closure must be in [0, 1]");
}

namespace {

PropagationGraph make_graph(const SynthConfig& config, int label, std::uint64_t seed,
                            const std::string& id) {
    Rng rng(seed);
    const int n = static_cast<int>(rng.uniform_int(config.min_nodes, config.max_nodes));

    PropagationGraph g;
    g.id = id;
    g.num_nodes = n;
    g.root = 0;
    g.label = label;

    // Random recursive tree: each new node attaches to a uniform earlier one.
    g.edges.reserve(static_cast<std::size_t>(n - 1));
    for (int v = 1; v < n; ++v) {
        const int parent = static_cast<int>(rng.uniform_int(0, v - 1));
        g.edges.emplace_back(std::min(parent, v), std::max(parent, v));
    }

    // Close tree wedges into triangles. In a tree two nodes share at most one
    // common neighbor, so each closure edge is proposed exactly once.
    const double p = std::min(1.0, config.base_closure +
                                       static_cast<double>(label) * config.structure_signal);
    if (p > 0.0) {
        std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
        for (const Edge& e : g.edges) {
            nbrs[static_cast<std::size_t>(e.first)].push_back(e.second);
            nbrs[static_cast<std::size_t>(e.second)].push_back(e.first);
        }
        for (auto& list : nbrs) std::sort(list.begin(), list.end());
        for (int v = 0; v < n; ++v) {
            const auto& list = nbrs[static_cast<std::size_t>(v)];
            for (std::size_t a = 0; a < list.size(); ++a)
                for (std::size_t b = a + 1; b < list.size(); ++b)
                    if (rng.bernoulli(p)) g.edges.emplace_back(list[a], list[b]);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());

    g.features = Tensor2D(static_cast<std::size_t>(n), config.feat_dim);
    for (double& v : g.features.data()) v = rng.normal();
    if (label == 1 && config.feature_signal > 0.0) {
        const std::size_t shifted = std::min<std::size_t>(8, config.feat_dim);
        for (std::size_t row = 0; row < g.features.rows(); ++row)
            for (std::size_t col = 0; col < shifted; ++col)
                g.features(row, col) += config.feature_signal;
    }

    require_valid(g);
    return g;
}

} // namespace

GraphDataset generate(const SynthConfig& config) {
    config.validate();
    GraphDataset ds;
    ds.name = config.name;
    ds.graphs.reserve(static_cast<std::size_t>(config.graphs_per_class) * 2);
    std::uint64_t index = 0;
    for (int label = 0; label <= 1; ++label) {
        for (int i = 0; i < config.graphs_per_class; ++i, ++index) {
            char id[32];
            std::snprintf(id, sizeof(id), "g%06llu",
                          static_cast<unsigned long long>(index));
            ds.graphs.push_back(
                make_graph(config, label, mix_seed(config.seed, index), id));
        }
    }
    return ds;
}

} // namespace newsprop
