#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "newsprop/errors.hpp"
#include "newsprop/graph.hpp"

using namespace newsprop;

namespace {

PropagationGraph make_graph(const std::string& id, int n, std::vector<Edge> edges,
                            int label = 0) {
    PropagationGraph g;
    g.id = id;
    g.num_nodes = n;
    g.edges = std::move(edges);
    g.features = Tensor2D(static_cast<std::size_t>(n), 2);
    for (int v = 0; v < n; ++v) {
        g.features(v, 0) = v;
        g.features(v, 1) = 0.5 * v + label;
    }
    g.label = label;
    return g;
}

} // namespace

TEST_CASE("validate_graph accepts a triangle") {
    const auto g = make_graph("t", 3, {{0, 1}, {1, 2}, {0, 2}});
    const auto r = validate_graph(g);
    CHECK(r.ok);
    CHECK_NOTHROW(require_valid(g));
}

TEST_CASE("validate_graph names each violation") {
    SUBCASE("self loop") {
        const auto r = validate_graph(make_graph("g", 2, {{0, 0}}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == "SelfLoop");
    }
    SUBCASE("orientation-insensitive duplicate") {
        const auto r = validate_graph(make_graph("g", 2, {{0, 1}, {1, 0}}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == "DuplicateEdge");
    }
    SUBCASE("literal duplicate") {
        const auto r = validate_graph(make_graph("g", 3, {{0, 1}, {0, 1}}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == "DuplicateEdge");
    }
    SUBCASE("endpoint out of range") {
        const auto r = validate_graph(make_graph("g", 2, {{0, 2}}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == "IndexOutOfRange");
    }
    SUBCASE("root out of range") {
        auto g = make_graph("g", 2, {{0, 1}});
        g.root = 5;
        const auto r = validate_graph(g);
        CHECK_FALSE(r.ok);
        CHECK(r.code == "IndexOutOfRange");
    }
    SUBCASE("feature row count mismatch") {
        auto g = make_graph("g", 3, {{0, 1}});
        g.features = Tensor2D(2, 2);
        const auto r = validate_graph(g);
        CHECK_FALSE(r.ok);
        CHECK(r.code == "RaggedFeatureMatrix");
    }
    SUBCASE("require_valid throws with the code") {
        try {
            require_valid(make_graph("g", 2, {{0, 0}}));
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(e.code() == "SelfLoop");
        }
    }
}

TEST_CASE("neighbors are sorted and symmetric") {
    const auto star = make_graph("s", 4, {{0, 2}, {0, 1}, {0, 3}});
    CHECK(neighbors(star, 0) == std::vector<int>{1, 2, 3});
    CHECK(neighbors(star, 2) == std::vector<int>{0});

    const auto isolated = make_graph("i", 1, {});
    CHECK(neighbors(isolated, 0).empty());

    CHECK_THROWS_AS(neighbors(star, 4), DataError);
    CHECK_THROWS_AS(neighbors(star, -1), DataError);
}

TEST_CASE("build_adjacency sorts each neighborhood") {
    const auto adj = build_adjacency(4, {{2, 0}, {0, 1}, {3, 0}, {1, 2}});
    CHECK(adj.offsets == std::vector<int>{0, 3, 5, 7, 8});
    CHECK(adj.degree(0) == 3);
    CHECK(adj.degree(3) == 1);
    CHECK(std::vector<int>(adj.begin(0), adj.end(0)) == std::vector<int>{1, 2, 3});
    CHECK(std::vector<int>(adj.begin(2), adj.end(2)) == std::vector<int>{0, 1});
}

TEST_CASE("batch_graphs offsets the second graph") {
    const auto a = make_graph("a", 2, {{0, 1}}, 0);
    const auto b = make_graph("b", 3, {{0, 1}, {1, 2}}, 1);
    const auto batch = batch_graphs({a, b});

    CHECK(batch.total_nodes == 5);
    CHECK(batch.num_graphs == 2);
    CHECK(batch.membership == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(batch.labels == std::vector<int>{0, 1});
    CHECK(batch.roots == std::vector<int>{0, 2});
    CHECK(batch.ids == std::vector<std::string>{"a", "b"});
    REQUIRE(batch.edges.size() == 3);
    CHECK(batch.edges[0] == Edge{0, 1});
    CHECK(batch.edges[1] == Edge{2, 3});
    CHECK(batch.edges[2] == Edge{3, 4});
    CHECK(batch.features.rows() == 5);
    CHECK(batch.features(2, 0) == b.features(0, 0));
    CHECK(batch.features(4, 1) == b.features(2, 1));
}

TEST_CASE("single-graph batch is the identity embedding") {
    const auto a = make_graph("a", 3, {{0, 1}, {1, 2}});
    const auto batch = batch_graphs({a});
    CHECK(batch.total_nodes == 3);
    CHECK(batch.edges == a.edges);
    CHECK(batch.membership == std::vector<int>{0, 0, 0});
}

TEST_CASE("batch_graphs rejects bad input") {
    CHECK_THROWS_AS(batch_graphs({}), DataError);

    auto a = make_graph("a", 2, {{0, 1}});
    auto b = make_graph("b", 2, {{0, 1}});
    b.features = Tensor2D(2, 5);
    try {
        batch_graphs({a, b});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "FeatureDimMismatch");
    }
}

TEST_CASE("unbatch inverts batch_graphs field by field") {
    std::vector<PropagationGraph> gs;
    gs.push_back(make_graph("x", 1, {}, 0));
    gs.push_back(make_graph("y", 4, {{0, 1}, {0, 2}, {2, 3}}, 1));
    gs.push_back(make_graph("z", 3, {{0, 1}, {1, 2}, {0, 2}}, 0));
    gs[1].root = 2;

    const auto back = unbatch(batch_graphs(gs));
    REQUIRE(back.size() == gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        CHECK(back[i].id == gs[i].id);
        CHECK(back[i].num_nodes == gs[i].num_nodes);
        CHECK(back[i].edges == gs[i].edges);
        CHECK(back[i].root == gs[i].root);
        CHECK(back[i].label == gs[i].label);
        CHECK(bits_equal(back[i].features, gs[i].features));
    }
}

namespace {

GraphDataset dataset_of(int per_class) {
    GraphDataset ds;
    ds.name = "toy";
    for (int i = 0; i < per_class; ++i) {
        ds.graphs.push_back(make_graph("r" + std::to_string(i), 3, {{0, 1}, {1, 2}}, 0));
        ds.graphs.push_back(make_graph("f" + std::to_string(i), 3, {{0, 1}, {0, 2}}, 1));
    }
    return ds;
}

} // namespace

TEST_CASE("split sizes follow floor-then-remainder-to-train") {
    const auto split = split_dataset(dataset_of(5), {0.7, 0.1, 0.2}, 42);
    CHECK(split.split_indices(Split::Train).size() == 7);
    CHECK(split.split_indices(Split::Val).size() == 1);
    CHECK(split.split_indices(Split::Test).size() == 2);
}

TEST_CASE("split is a deterministic partition") {
    const auto ds = dataset_of(10);
    const auto s1 = split_dataset(ds, {0.7, 0.1, 0.2}, 42);
    const auto s2 = split_dataset(ds, {0.7, 0.1, 0.2}, 42);
    CHECK(s1.splits == s2.splits);

    const auto s3 = split_dataset(ds, {0.7, 0.1, 0.2}, 43);
    CHECK(s3.splits != s1.splits);

    std::set<std::string> covered;
    for (const auto& [id, split] : s1.splits) covered.insert(id);
    CHECK(covered.size() == ds.graphs.size());
    CHECK(s1.split_indices(Split::Train).size() + s1.split_indices(Split::Val).size() +
              s1.split_indices(Split::Test).size() ==
          ds.graphs.size());
}

TEST_CASE("split is stratified within one graph per class") {
    const auto ds = dataset_of(20);
    const auto split = split_dataset(ds, {0.5, 0.25, 0.25}, 7);
    for (const Split s : {Split::Train, Split::Val, Split::Test}) {
        int per_label[2] = {0, 0};
        for (const auto idx : split.split_indices(s)) ++per_label[split.graphs[idx].label];
        CHECK(std::abs(per_label[0] - per_label[1]) <= 1);
    }
    int train_labels[2] = {0, 0};
    for (const auto idx : split.split_indices(Split::Train))
        ++train_labels[split.graphs[idx].label];
    CHECK(train_labels[0] >= 1);
    CHECK(train_labels[1] >= 1);
}

TEST_CASE("split rejects bad fractions and missing classes") {
    const auto ds = dataset_of(5);
    CHECK_THROWS_AS(split_dataset(ds, {0.5, 0.5, 0.5}, 1), DataError);
    CHECK_THROWS_AS(split_dataset(ds, {-0.1, 0.6, 0.5}, 1), DataError);

    GraphDataset single;
    single.graphs.push_back(make_graph("only", 2, {{0, 1}}, 0));
    single.graphs.push_back(make_graph("only2", 2, {{0, 1}}, 0));
    try {
        split_dataset(single, {0.7, 0.1, 0.2}, 1);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "ClassMissing");
    }
}

TEST_CASE("split_from_name round-trips the three names") {
    for (const Split s : {Split::Train, Split::Val, Split::Test}) {
        const auto parsed = split_from_name(split_name(s));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == s);
    }
    CHECK_FALSE(split_from_name("holdout").has_value());
}
