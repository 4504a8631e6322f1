#include "newsprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "newsprop/rng.hpp"

namespace newsprop {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

std::optional<Split> split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

int GraphDataset::feat_dim() const {
    return graphs.empty() ? 0 : graphs.front().feat_dim();
}

std::vector<std::size_t> GraphDataset::split_indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        auto it = splits.find(graphs[i].id);
        if (it != splits.end() && it->second == split) out.push_back(i);
    }
    return out;
}

Adjacency build_adjacency(int num_nodes, const std::vector<Edge>& edges) {
    Adjacency adj;
    adj.offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (const auto& [u, v] : edges) {
        ++adj.offsets[static_cast<std::size_t>(u) + 1];
        ++adj.offsets[static_cast<std::size_t>(v) + 1];
    }
    for (std::size_t i = 1; i < adj.offsets.size(); ++i)
        adj.offsets[i] += adj.offsets[i - 1];
    adj.neighbors.resize(edges.size() * 2);
    std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        adj.neighbors[static_cast<std::size_t>(cursor[u]++)] = v;
        adj.neighbors[static_cast<std::size_t>(cursor[v]++)] = u;
    }
    for (int v = 0; v < num_nodes; ++v)
        std::sort(adj.neighbors.begin() + adj.offsets[v],
                  adj.neighbors.begin() + adj.offsets[v + 1]);
    return adj;
}

ValidationResult validate_graph(const PropagationGraph& g) {
    auto fail = [](std::string code, std::string msg) {
        return ValidationResult{false, std::move(code), std::move(msg)};
    };
    if (g.num_nodes <= 0)
        return fail("IndexOutOfRange", "num_nodes must be positive, got " +
                                           std::to_string(g.num_nodes));
    if (g.root < 0 || g.root >= g.num_nodes)
        return fail("IndexOutOfRange",
                    "root " + std::to_string(g.root) + " not in [0, " +
                        std::to_string(g.num_nodes) + ")");
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& [u, v] = g.edges[i];
        if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes)
            return fail("IndexOutOfRange",
                        "edge " + std::to_string(i) + " = (" + std::to_string(u) +
                            "," + std::to_string(v) + ") exceeds node range");
        if (u == v)
            return fail("SelfLoop", "edge " + std::to_string(i) + " is (" +
                                        std::to_string(u) + "," + std::to_string(v) + ")");
    }
    // Orientation-insensitive duplicate detection.
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(g.edges.size() * 2);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto [u, v] = g.edges[i];
        const auto a = static_cast<std::uint64_t>(std::min(u, v));
        const auto b = static_cast<std::uint64_t>(std::max(u, v));
        if (!seen.insert((a << 32) | b).second)
            return fail("DuplicateEdge", "edge " + std::to_string(i) + " = (" +
                                             std::to_string(u) + "," +
                                             std::to_string(v) + ") repeats a pair");
    }
    if (g.features.rows() != static_cast<std::size_t>(g.num_nodes))
        return fail("RaggedFeatureMatrix",
                    "feature matrix has " + std::to_string(g.features.rows()) +
                        " rows for " + std::to_string(g.num_nodes) + " nodes");
    return ValidationResult{};
}

void require_valid(const PropagationGraph& g) {
    const auto res = validate_graph(g);
    if (!res.ok) throw DataError(res.code, "graph '" + g.id + "': " + res.message);
}

std::vector<int> neighbors(const PropagationGraph& g, int v) {
    if (v < 0 || v >= g.num_nodes)
        throw DataError("IndexOutOfRange", "node " + std::to_string(v) + " not in [0, " +
                                               std::to_string(g.num_nodes) + ")");
    std::vector<int> out;
    for (const auto& [a, b] : g.edges) {
        if (a == v) out.push_back(b);
        if (b == v) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BatchedGraph batch_graphs(const std::vector<PropagationGraph>& graphs) {
    if (graphs.empty()) throw DataError("EmptyBatch", "batch_graphs needs at least one graph");
    const int feat_dim = graphs.front().feat_dim();
    int total_nodes = 0;
    std::size_t total_edges = 0;
    for (const auto& g : graphs) {
        if (g.feat_dim() != feat_dim)
            throw DataError("FeatureDimMismatch",
                            "graph '" + g.id + "' has feat_dim " +
                                std::to_string(g.feat_dim()) + ", expected " +
                                std::to_string(feat_dim));
        total_nodes += g.num_nodes;
        total_edges += g.edges.size();
    }

    BatchedGraph batch;
    batch.total_nodes = total_nodes;
    batch.num_graphs = static_cast<int>(graphs.size());
    batch.edges.reserve(total_edges);
    batch.features = Tensor2D(static_cast<std::size_t>(total_nodes),
                              static_cast<std::size_t>(feat_dim));
    batch.membership.reserve(static_cast<std::size_t>(total_nodes));

    int offset = 0;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const auto& g = graphs[k];
        for (const auto& [u, v] : g.edges)
            batch.edges.emplace_back(u + offset, v + offset);
        for (int r = 0; r < g.num_nodes; ++r) {
            std::copy(g.features.row(r), g.features.row(r) + feat_dim,
                      batch.features.row(static_cast<std::size_t>(offset + r)));
            batch.membership.push_back(static_cast<int>(k));
        }
        batch.labels.push_back(g.label);
        batch.roots.push_back(g.root + offset);
        batch.ids.push_back(g.id);
        offset += g.num_nodes;
    }
    return batch;
}

std::vector<PropagationGraph> unbatch(const BatchedGraph& batch) {
    std::vector<int> node_counts(static_cast<std::size_t>(batch.num_graphs), 0);
    for (int m : batch.membership) ++node_counts[static_cast<std::size_t>(m)];
    std::vector<int> offsets(static_cast<std::size_t>(batch.num_graphs) + 1, 0);
    for (int k = 0; k < batch.num_graphs; ++k)
        offsets[static_cast<std::size_t>(k) + 1] =
            offsets[static_cast<std::size_t>(k)] + node_counts[static_cast<std::size_t>(k)];

    std::vector<PropagationGraph> out(static_cast<std::size_t>(batch.num_graphs));
    for (int k = 0; k < batch.num_graphs; ++k) {
        auto& g = out[static_cast<std::size_t>(k)];
        g.id = batch.ids[static_cast<std::size_t>(k)];
        g.num_nodes = node_counts[static_cast<std::size_t>(k)];
        g.label = batch.labels[static_cast<std::size_t>(k)];
        g.root = batch.roots[static_cast<std::size_t>(k)] - offsets[static_cast<std::size_t>(k)];
        g.features = Tensor2D(static_cast<std::size_t>(g.num_nodes), batch.features.cols());
        for (int r = 0; r < g.num_nodes; ++r) {
            const auto src = static_cast<std::size_t>(offsets[static_cast<std::size_t>(k)] + r);
            std::copy(batch.features.row(src), batch.features.row(src) + batch.features.cols(),
                      g.features.row(static_cast<std::size_t>(r)));
        }
    }
    for (const auto& [u, v] : batch.edges) {
        const int k = batch.membership[static_cast<std::size_t>(u)];
        const int base = offsets[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k)].edges.emplace_back(u - base, v - base);
    }
    return out;
}

GraphDataset split_dataset(const GraphDataset& ds, const SplitFractions& fractions,
                           std::uint64_t seed) {
    const double sum = fractions.train + fractions.val + fractions.test;
    if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test <= 0.0 ||
        std::abs(sum - 1.0) > 1e-9)
        throw DataError("BadFractions",
                        "fractions must be positive and sum to 1, got " +
                            std::to_string(fractions.train) + "/" +
                            std::to_string(fractions.val) + "/" +
                            std::to_string(fractions.test));

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.graphs.size(); ++i)
        by_class[ds.graphs[i].label == 1 ? 1 : 0].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw DataError("ClassMissing",
                        std::string("label ") + (by_class[0].empty() ? "0" : "1") +
                            " absent from dataset");

    const auto n = ds.graphs.size();
    // Global sizes: floor each, remainder to train.
    const auto global_val = static_cast<std::size_t>(std::floor(fractions.val * static_cast<double>(n)));
    const auto global_test = static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n)));

    // Per-class floors plus largest-remainder top-up until the global counts
    // are met; a top-up never empties a class's training share.
    std::size_t val_count[2];
    std::size_t test_count[2];
    auto allocate = [&](double fraction, std::size_t global, std::size_t out[2],
                        const std::size_t reserved[2]) {
        double frac_part[2];
        for (int c = 0; c < 2; ++c) {
            const double target = fraction * static_cast<double>(by_class[c].size());
            out[c] = static_cast<std::size_t>(std::floor(target));
            frac_part[c] = target - static_cast<double>(out[c]);
        }
        std::size_t assigned = out[0] + out[1];
        while (assigned < global) {
            int pick = -1;
            for (int c = 0; c < 2; ++c) {
                const std::size_t used = out[c] + reserved[c];
                if (used + 1 >= by_class[c].size()) continue;  // keep one for train
                if (pick < 0 || frac_part[c] > frac_part[pick] ||
                    (frac_part[c] == frac_part[pick] &&
                     by_class[c].size() > by_class[pick].size()))
                    pick = c;
            }
            if (pick < 0) break;
            ++out[pick];
            frac_part[pick] = -1.0;
            ++assigned;
        }
    };
    const std::size_t none[2] = {0, 0};
    allocate(fractions.test, global_test, test_count, none);
    allocate(fractions.val, global_val, val_count, test_count);

    Rng rng(seed);
    GraphDataset out = ds;
    out.splits.clear();
    for (int c = 0; c < 2; ++c) {
        auto ids = by_class[c];
        rng.shuffle(ids);
        std::size_t pos = 0;
        for (std::size_t j = 0; j < test_count[c]; ++j)
            out.splits[ds.graphs[ids[pos++]].id] = Split::Test;
        for (std::size_t j = 0; j < val_count[c]; ++j)
            out.splits[ds.graphs[ids[pos++]].id] = Split::Val;
        for (; pos < ids.size(); ++pos)
            out.splits[ds.graphs[ids[pos]].id] = Split::Train;
    }
    return out;
}

} // namespace newsprop
