#include "newsprop/topo.hpp"

#include <algorithm>

namespace newsprop {

std::vector<double> degree_centrality(const PropagationGraph& g) {
    require_valid(g);
    const auto n = static_cast<std::size_t>(g.num_nodes);
    std::vector<double> out(n, 0.0);
    if (g.num_nodes < 2) return out;
    const Adjacency adj = build_adjacency(g.num_nodes, g.edges);
    const double denom = static_cast<double>(g.num_nodes - 1);
    for (int v = 0; v < g.num_nodes; ++v)
        out[static_cast<std::size_t>(v)] = static_cast<double>(adj.degree(v)) / denom;
    return out;
}

namespace {

// Count of elements common to two sorted ranges.
int sorted_intersection_size(const int* a_begin, const int* a_end,
                             const int* b_begin, const int* b_end) {
    int count = 0;
    while (a_begin != a_end && b_begin != b_end) {
        if (*a_begin < *b_begin) ++a_begin;
        else if (*b_begin < *a_begin) ++b_begin;
        else { ++count; ++a_begin; ++b_begin; }
    }
    return count;
}

} // namespace

std::vector<double> local_clustering(const PropagationGraph& g) {
    require_valid(g);
    const auto n = static_cast<std::size_t>(g.num_nodes);
    std::vector<double> out(n, 0.0);
    const Adjacency adj = build_adjacency(g.num_nodes, g.edges);
    for (int v = 0; v < g.num_nodes; ++v) {
        const int deg = adj.degree(v);
        if (deg < 2) continue;
        // Each edge among N(v) is seen once from each endpoint.
        int twice_triangles = 0;
        for (const int* u = adj.begin(v); u != adj.end(v); ++u)
            twice_triangles += sorted_intersection_size(adj.begin(v), adj.end(v),
                                                        adj.begin(*u), adj.end(*u));
        out[static_cast<std::size_t>(v)] =
            static_cast<double>(twice_triangles) /
            (static_cast<double>(deg) * static_cast<double>(deg - 1));
    }
    return out;
}

std::vector<double> clustering_oracle(const PropagationGraph& g) {
    require_valid(g);
    if (g.num_nodes > 200)
        throw DataError("TooLarge", "clustering_oracle is cubic; got " +
                                        std::to_string(g.num_nodes) + " nodes (max 200)");
    const auto n = static_cast<std::size_t>(g.num_nodes);
    std::vector<bool> dense(n * n, false);
    for (const auto& [u, v] : g.edges) {
        dense[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = true;
        dense[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = true;
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        long long wedges = 0;
        long long closed = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v || !dense[v * n + u]) continue;
            for (std::size_t w = u + 1; w < n; ++w) {
                if (w == v || !dense[v * n + w]) continue;
                ++wedges;
                if (dense[u * n + w]) ++closed;
            }
        }
        if (wedges > 0)
            out[v] = static_cast<double>(closed) / static_cast<double>(wedges);
    }
    return out;
}

double graph_density(const PropagationGraph& g) {
    require_valid(g);
    if (g.num_nodes < 2) return 0.0;
    return 2.0 * static_cast<double>(g.num_edges()) /
           (static_cast<double>(g.num_nodes) * static_cast<double>(g.num_nodes - 1));
}

double average_degree(const PropagationGraph& g) {
    require_valid(g);
    return 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes);
}

PropagationGraph augment_features(const PropagationGraph& g) {
    const auto centrality = degree_centrality(g);
    const auto clustering = local_clustering(g);
    PropagationGraph out = g;
    const auto n = static_cast<std::size_t>(g.num_nodes);
    const auto d = g.features.cols();
    out.features = Tensor2D(n, d + 2);
    for (std::size_t r = 0; r < n; ++r) {
        std::copy(g.features.row(r), g.features.row(r) + d, out.features.row(r));
        out.features(r, d) = centrality[r];
        out.features(r, d + 1) = clustering[r];
    }
    return out;
}

TopoSummary summarize(const PropagationGraph& g) {
    const auto centrality = degree_centrality(g);
    const auto clustering = local_clustering(g);
    const auto n = static_cast<double>(g.num_nodes);
    TopoSummary s;
    s.avg_degree = average_degree(g);
    for (double c : centrality) s.mean_degree_centrality += c;
    s.mean_degree_centrality /= n;
    for (double c : clustering) s.mean_clustering += c;
    s.mean_clustering /= n;
    s.density = graph_density(g);
    s.node_count = g.num_nodes;
    s.label = g.label;
    s.graph_id = g.id;
    return s;
}

} // namespace newsprop
