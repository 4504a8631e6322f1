#include "newsprop/ablation.hpp"

#include <algorithm>
#include <unordered_set>

namespace newsprop {

namespace {

std::uint64_t pair_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

// Lexicographic index of pair (i, j), i < j, over n nodes, inverted: walk
// rows until the remainder fits inside row i's (n - 1 - i) pairs.
Edge unrank_pair(std::uint64_t k, int n) {
    for (int i = 0; i < n - 1; ++i) {
        const auto row = static_cast<std::uint64_t>(n - 1 - i);
        if (k < row) return {i, i + 1 + static_cast<int>(k)};
        k -= row;
    }
    throw DataError("TooDense", "pair index out of range");
}

} // namespace

PropagationGraph randomize_edges(const PropagationGraph& g, std::uint64_t seed) {
    require_valid(g);
    const auto n = static_cast<std::uint64_t>(g.num_nodes);
    const std::uint64_t total_pairs = n * (n - 1) / 2;
    const auto m = static_cast<std::uint64_t>(g.num_edges());
    if (m > total_pairs)
        throw DataError("TooDense", "graph " + g.id + " has " + std::to_string(m) +
                                        " edges but only " + std::to_string(total_pairs) +
                                        " pairs exist");

    // Floyd's uniform m-subset of {0, ..., total_pairs-1}.
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(m) * 2);
    for (std::uint64_t j = total_pairs - m; j < total_pairs; ++j) {
        const std::uint64_t t = rng.bounded(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }

    std::vector<std::uint64_t> indices(chosen.begin(), chosen.end());
    std::sort(indices.begin(), indices.end());

    PropagationGraph out = g;
    out.edges.clear();
    out.edges.reserve(indices.size());
    for (std::uint64_t k : indices) out.edges.push_back(unrank_pair(k, g.num_nodes));
    require_valid(out);
    return out;
}

PropagationGraph randomize_edges_preserve_degrees(const PropagationGraph& g,
                                                  std::uint64_t seed) {
    require_valid(g);
    PropagationGraph out = g;
    const auto m = out.edges.size();
    if (m < 2) return out;

    std::unordered_set<std::uint64_t> present;
    present.reserve(m * 2);
    for (const Edge& e : out.edges) present.insert(pair_key(e.first, e.second));

    Rng rng(seed);
    const std::size_t attempts = 10 * m;
    for (std::size_t t = 0; t < attempts; ++t) {
        const auto i = static_cast<std::size_t>(rng.bounded(m));
        const auto j = static_cast<std::size_t>(rng.bounded(m));
        if (i == j) continue;
        auto [a, b] = out.edges[i];
        auto [c, d] = out.edges[j];
        if (rng.bernoulli(0.5)) std::swap(c, d);
        // Proposed rewiring: (a,b),(c,d) -> (a,d),(c,b).
        if (a == d || c == b) continue;
        const std::uint64_t k1 = pair_key(a, d);
        const std::uint64_t k2 = pair_key(c, b);
        if (k1 == k2 || present.count(k1) || present.count(k2)) continue;
        present.erase(pair_key(a, b));
        present.erase(pair_key(c, d));
        present.insert(k1);
        present.insert(k2);
        out.edges[i] = {std::min(a, d), std::max(a, d)};
        out.edges[j] = {std::min(c, b), std::max(c, b)};
    }

    std::sort(out.edges.begin(), out.edges.end());
    require_valid(out);
    return out;
}

PropagationGraph gaussian_features(const PropagationGraph& g, std::uint64_t seed) {
    require_valid(g);
    PropagationGraph out = g;
    Rng rng(seed);
    for (double& v : out.features.data()) v = rng.normal();
    return out;
}

namespace {

enum class Setting { Original, FeatureOnly, StructureOnly };

GraphDataset apply_setting(const GraphDataset& dataset, Setting setting,
                           std::uint64_t seed, bool preserve_degrees) {
    if (setting == Setting::Original) return dataset;
    GraphDataset out = dataset;
    for (std::size_t i = 0; i < out.graphs.size(); ++i) {
        const std::uint64_t graph_seed = mix_seed(seed, i);
        if (setting == Setting::FeatureOnly)
            out.graphs[i] = preserve_degrees
                                ? randomize_edges_preserve_degrees(out.graphs[i], graph_seed)
                                : randomize_edges(out.graphs[i], graph_seed);
        else
            out.graphs[i] = gaussian_features(out.graphs[i], graph_seed);
    }
    return out;
}

double test_accuracy(const GraphDataset& dataset, const TrainConfig& config) {
    const TrainResult result = train(dataset, config);
    auto model = restore_model(result.best);
    const GraphDataset with_splits =
        dataset.has_splits() ? dataset
                             : split_dataset(dataset, config.fractions, config.seed);
    return evaluate(*model, with_splits, Split::Test).accuracy;
}

} // namespace

AblationReport run_ablation(const GraphDataset& dataset, const TrainConfig& config,
                            bool preserve_degrees) {
    config.validate();
    // One split assignment shared by all three settings: ablations change
    // graph contents, never which graphs land in which split.
    const GraphDataset base = dataset.has_splits()
                                  ? dataset
                                  : split_dataset(dataset, config.fractions, config.seed);

    const std::uint64_t edge_seed = mix_seed(config.seed, 0xedce5);
    const std::uint64_t feat_seed = mix_seed(config.seed, 0xfea75);

    AblationReport report;
    report.seed = config.seed;
    report.dataset = dataset.name;
    report.accuracy_original = test_accuracy(base, config);
    report.accuracy_feature_only = test_accuracy(
        apply_setting(base, Setting::FeatureOnly, edge_seed, preserve_degrees), config);
    report.accuracy_structure_only = test_accuracy(
        apply_setting(base, Setting::StructureOnly, feat_seed, preserve_degrees), config);
    report.degradation_structure = report.accuracy_original - report.accuracy_feature_only;
    report.degradation_features = report.accuracy_original - report.accuracy_structure_only;
    return report;
}

} // namespace newsprop
