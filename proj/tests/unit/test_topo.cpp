#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "newsprop/errors.hpp"
#include "newsprop/graph.hpp"
#include "newsprop/rng.hpp"
#include "newsprop/topo.hpp"

using namespace newsprop;

namespace {

PropagationGraph make_graph(const std::string& id, int n, std::vector<Edge> edges,
                            int label = 0) {
    PropagationGraph g;
    g.id = id;
    g.num_nodes = n;
    g.edges = std::move(edges);
    g.features = Tensor2D(static_cast<std::size_t>(n), 3);
    for (int v = 0; v < n; ++v)
        for (int c = 0; c < 3; ++c) g.features(v, c) = 0.25 * v - 0.5 * c;
    g.label = label;
    return g;
}

PropagationGraph random_graph(int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.emplace_back(u, v);
    return make_graph("rand" + std::to_string(seed), n, std::move(edges));
}

PropagationGraph random_tree(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v)
        edges.emplace_back(static_cast<int>(rng.uniform_int(0, v - 1)), v);
    return make_graph("tree" + std::to_string(seed), n, std::move(edges));
}

} // namespace

TEST_CASE("degree centrality on star, path, and a lone node") {
    const auto star = make_graph("s", 4, {{0, 1}, {0, 2}, {0, 3}});
    CHECK(degree_centrality(star) == std::vector<double>{1.0, 1.0 / 3, 1.0 / 3, 1.0 / 3});

    const auto path = make_graph("p", 3, {{0, 1}, {1, 2}});
    CHECK(degree_centrality(path) == std::vector<double>{0.5, 1.0, 0.5});

    const auto lone = make_graph("l", 1, {});
    CHECK(degree_centrality(lone) == std::vector<double>{0.0});
}

TEST_CASE("centrality 1 iff adjacent to all other nodes") {
    const auto g = random_graph(25, 0.3, 5);
    const auto cent = degree_centrality(g);
    const auto adj = build_adjacency(g.num_nodes, g.edges);
    for (int v = 0; v < g.num_nodes; ++v) {
        CHECK(cent[v] >= 0.0);
        CHECK(cent[v] <= 1.0);
        CHECK((cent[v] == 1.0) == (adj.degree(v) == g.num_nodes - 1));
    }
}

TEST_CASE("local clustering on the triangle and the star") {
    const auto tri = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(local_clustering(tri) == std::vector<double>{1.0, 1.0, 1.0});

    const auto star = make_graph("s", 4, {{0, 1}, {0, 2}, {0, 3}});
    CHECK(local_clustering(star) == std::vector<double>(4, 0.0));
}

TEST_CASE("local clustering on K4 minus one edge") {
    const auto g =
        make_graph("k4e", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
    const auto cc = local_clustering(g);
    CHECK(cc == std::vector<double>{2.0 / 3, 2.0 / 3, 1.0, 1.0});
}

TEST_CASE("oracle matches on the handbook cases") {
    const auto tri = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(clustering_oracle(tri) == std::vector<double>{1.0, 1.0, 1.0});

    const auto empty = make_graph("e", 5, {});
    CHECK(clustering_oracle(empty) == std::vector<double>(5, 0.0));
}

TEST_CASE("fast clustering equals the exhaustive oracle exactly") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const int n = 2 + static_cast<int>(seed % 59);
        const double p = 0.05 + 0.3 * static_cast<double>(seed % 7) / 6.0;
        const auto g = random_graph(n, p, seed);
        CHECK(local_clustering(g) == clustering_oracle(g));
    }
}

TEST_CASE("oracle refuses oversized graphs") {
    try {
        clustering_oracle(random_tree(201, 1));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "TooLarge");
    }
}

TEST_CASE("density and average degree") {
    const auto tri = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(graph_density(tri) == 1.0);
    CHECK(average_degree(tri) == 2.0);

    const auto path = make_graph("p", 3, {{0, 1}, {1, 2}});
    CHECK(graph_density(path) == 2.0 / 3);
    CHECK(average_degree(path) == 4.0 / 3);

    const auto lone = make_graph("l", 1, {});
    CHECK(graph_density(lone) == 0.0);
    CHECK(average_degree(lone) == 0.0);
}

TEST_CASE("metrics are permutation-equivariant") {
    const auto g = random_graph(20, 0.25, 9);
    std::vector<int> perm(g.num_nodes);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(77);
    rng.shuffle(perm);

    PropagationGraph h = g;
    h.id = "permuted";
    for (auto& [u, v] : h.edges) {
        u = perm[u];
        v = perm[v];
    }
    for (int v = 0; v < g.num_nodes; ++v)
        for (std::size_t c = 0; c < g.features.cols(); ++c)
            h.features(perm[v], c) = g.features(v, c);

    const auto cent_g = degree_centrality(g);
    const auto cent_h = degree_centrality(h);
    const auto cc_g = local_clustering(g);
    const auto cc_h = local_clustering(h);
    for (int v = 0; v < g.num_nodes; ++v) {
        CHECK(cent_h[perm[v]] == cent_g[v]);
        CHECK(cc_h[perm[v]] == cc_g[v]);
    }
}

TEST_CASE("augment appends centrality then clustering") {
    auto tri = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}});
    tri.features = Tensor2D(3, 4, 0.0);
    const auto aug = augment_features(tri);

    CHECK(aug.feat_dim() == 6);
    CHECK(aug.num_nodes == tri.num_nodes);
    CHECK(aug.edges == tri.edges);
    for (int v = 0; v < 3; ++v) {
        CHECK(aug.features(v, 4) == 1.0);
        CHECK(aug.features(v, 5) == 1.0);
    }
}

TEST_CASE("augment copies original columns bit-exactly") {
    const auto g = random_graph(15, 0.3, 21);
    const auto aug = augment_features(g);
    REQUIRE(aug.feat_dim() == g.feat_dim() + 2);
    for (int v = 0; v < g.num_nodes; ++v)
        for (std::size_t c = 0; c < g.features.cols(); ++c)
            CHECK(aug.features(v, c) == g.features(v, c));
}

TEST_CASE("augmenting twice repeats the metric columns") {
    const auto g = random_graph(12, 0.35, 33);
    const auto once = augment_features(g);
    const auto twice = augment_features(once);

    CHECK(twice.feat_dim() == g.feat_dim() + 4);
    const auto d = static_cast<std::size_t>(g.feat_dim());
    for (int v = 0; v < g.num_nodes; ++v) {
        CHECK(twice.features(v, d + 2) == twice.features(v, d));
        CHECK(twice.features(v, d + 3) == twice.features(v, d + 1));
    }
}

TEST_CASE("summarize the triangle and the star") {
    const auto tri = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}}, 1);
    const auto s = summarize(tri);
    CHECK(s.avg_degree == 2.0);
    CHECK(s.mean_degree_centrality == 1.0);
    CHECK(s.mean_clustering == 1.0);
    CHECK(s.density == 1.0);
    CHECK(s.node_count == 3);
    CHECK(s.label == 1);
    CHECK(s.graph_id == "t");

    const auto star = summarize(make_graph("s", 4, {{0, 1}, {0, 2}, {0, 3}}));
    CHECK(star.avg_degree == 1.5);
    CHECK(star.density == 0.5);
    CHECK(star.mean_clustering == 0.0);
}

TEST_CASE("trees have zero clustering and density 2/n") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int n = 5 + static_cast<int>(seed) * 5;
        const auto tree = random_tree(n, seed);
        const auto cc = local_clustering(tree);
        CHECK(std::all_of(cc.begin(), cc.end(), [](double x) { return x == 0.0; }));
        CHECK(graph_density(tree) == doctest::Approx(2.0 / n).epsilon(1e-12));
        CHECK(summarize(tree).mean_clustering == 0.0);
    }
}
