#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "newsprop/analysis.hpp"
#include "newsprop/errors.hpp"
#include "newsprop/rng.hpp"

using namespace newsprop;

namespace {

TopoSummary summary(const std::string& id, int label, double avg_degree,
                    double clustering, int node_count) {
    TopoSummary s;
    s.graph_id = id;
    s.label = label;
    s.avg_degree = avg_degree;
    s.mean_degree_centrality = avg_degree / static_cast<double>(node_count - 1);
    s.mean_clustering = clustering;
    s.density = avg_degree / static_cast<double>(node_count - 1);
    s.node_count = node_count;
    return s;
}

std::vector<TopoSummary> random_summaries(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TopoSummary> out;
    for (int label = 0; label < 2; ++label)
        for (int i = 0; i < per_class; ++i) {
            const int n = static_cast<int>(rng.uniform_int(8, 50));
            const double deg = 1.0 + 3.0 * rng.uniform01() + label;
            const double cc = 0.4 * rng.uniform01() + 0.2 * label;
            out.push_back(summary("g" + std::to_string(label) + "_" + std::to_string(i),
                                  label, deg, cc, n));
        }
    return out;
}

} // namespace

TEST_CASE("box stats of 1..5 hit the hand values") {
    const auto b = box_stats({1, 2, 3, 4, 5});
    CHECK(b.min == 1.0);
    CHECK(b.q1 == 2.0);
    CHECK(b.median == 3.0);
    CHECK(b.q3 == 4.0);
    CHECK(b.max == 5.0);
    CHECK(b.mean == 3.0);
}

TEST_CASE("box stats interpolate between ranks") {
    const auto b = box_stats({1, 2, 3, 4});
    CHECK(b.q1 == doctest::Approx(1.75));
    CHECK(b.median == doctest::Approx(2.5));
    CHECK(b.q3 == doctest::Approx(3.25));

    const auto single = box_stats({7});
    CHECK(single.min == 7.0);
    CHECK(single.q1 == 7.0);
    CHECK(single.median == 7.0);
    CHECK(single.max == 7.0);

    CHECK_THROWS_AS(box_stats({}), DataError);
}

TEST_CASE("box stats ignore input order") {
    const auto a = box_stats({5, 1, 4, 2, 3});
    const auto b = box_stats({1, 2, 3, 4, 5});
    CHECK(a.q1 == b.q1);
    CHECK(a.median == b.median);
    CHECK(a.q3 == b.q3);
}

TEST_CASE("pearson on exact linear relationships") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> up = {2, 4, 6, 8, 10};
    const std::vector<double> down = {5, 4, 3, 2, 1};
    CHECK(pearson(x, up) == doctest::Approx(1.0));
    CHECK(pearson(x, down) == doctest::Approx(-1.0));
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK(std::abs(pearson(x, {1, -1, 2, -2, 0})) < 1.0);

    CHECK_THROWS_AS(pearson(x, {1, 2}), DataError);
    try {
        pearson(x, {3, 3, 3, 3, 3});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "DegenerateFeature");
    }
}

TEST_CASE("report needs two summaries per class") {
    std::vector<TopoSummary> few = {summary("a", 0, 2.0, 0.1, 10),
                                    summary("b", 0, 3.0, 0.2, 12),
                                    summary("c", 1, 4.0, 0.3, 14)};
    try {
        build_report(few);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "TooFewSummaries");
    }
}

TEST_CASE("correlation matrix is symmetric with unit diagonal") {
    const auto report = build_report(random_summaries(30, 3));
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(std::abs(report.correlation[f][f] - 1.0) <= 1e-12);
        for (std::size_t g = 0; g < 5; ++g) {
            CHECK(report.correlation[f][g] == report.correlation[g][f]);
            CHECK(report.correlation[f][g] >= -1.0);
            CHECK(report.correlation[f][g] <= 1.0);
        }
    }
}

TEST_CASE("correlation matrix is positive semi-definite") {
    const auto report = build_report(random_summaries(40, 5));
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        double x[5], norm = 0.0;
        for (auto& v : x) {
            v = rng.normal();
        }
        double quad = 0.0;
        for (std::size_t f = 0; f < 5; ++f) {
            norm += x[f] * x[f];
            for (std::size_t g = 0; g < 5; ++g)
                quad += x[f] * report.correlation[f][g] * x[g];
        }
        CHECK(quad >= -1e-9 * norm);
    }
}

TEST_CASE("report is invariant to summary order") {
    auto summaries = random_summaries(20, 7);
    const auto a = build_report(summaries);
    Rng rng(13);
    rng.shuffle(summaries);
    const auto b = build_report(summaries);

    for (std::size_t f = 0; f < 5; ++f) {
        for (int c = 0; c < 2; ++c) {
            CHECK(a.box[f][static_cast<std::size_t>(c)].median ==
                  b.box[f][static_cast<std::size_t>(c)].median);
            CHECK(a.box[f][static_cast<std::size_t>(c)].mean ==
                  b.box[f][static_cast<std::size_t>(c)].mean);
        }
        for (std::size_t g = 0; g < 5; ++g)
            CHECK(a.correlation[f][g] == b.correlation[f][g]);
    }
    REQUIRE(a.scatter.size() == b.scatter.size());
    for (std::size_t i = 0; i < a.scatter.size(); ++i)
        CHECK(a.scatter[i].graph_id == b.scatter[i].graph_id);
    CHECK(a.node_count_histogram.edges == b.node_count_histogram.edges);
    CHECK(a.node_count_histogram.counts == b.node_count_histogram.counts);
}

TEST_CASE("scatter points are sorted by graph id") {
    const auto report = build_report(random_summaries(15, 17));
    CHECK(std::is_sorted(report.scatter.begin(), report.scatter.end(),
                         [](const auto& a, const auto& b) { return a.graph_id < b.graph_id; }));
    CHECK(report.scatter.size() == 30);
}

TEST_CASE("histogram has 20 bins whose counts cover every graph") {
    const auto summaries = random_summaries(25, 19);
    const auto report = build_report(summaries);
    const auto& h = report.node_count_histogram;

    REQUIRE(h.edges.size() == 21);
    CHECK(std::is_sorted(h.edges.begin(), h.edges.end()));
    CHECK(h.counts[0].size() == 20);
    CHECK(h.counts[1].size() == 20);

    long total0 = 0, total1 = 0;
    for (std::size_t b = 0; b < 20; ++b) {
        total0 += h.counts[0][b];
        total1 += h.counts[1][b];
    }
    CHECK(total0 == 25);
    CHECK(total1 == 25);
}

TEST_CASE("zero-variance features are flagged and zeroed off-diagonal") {
    std::vector<TopoSummary> summaries;
    for (int label = 0; label < 2; ++label)
        for (int i = 0; i < 5; ++i)
            summaries.push_back(summary("g" + std::to_string(label * 5 + i), label,
                                        2.0 + i + label, 0.1 * i, 12));

    const auto report = build_report(summaries);
    CHECK(report.degenerate[4]);
    CHECK_FALSE(report.degenerate[0]);
    for (std::size_t f = 0; f < 4; ++f) {
        CHECK(report.correlation[4][f] == 0.0);
        CHECK(report.correlation[f][4] == 0.0);
    }
    CHECK(report.correlation[4][4] == 1.0);
}

TEST_CASE("per-class box stats equal stats on that class alone") {
    const auto summaries = random_summaries(12, 23);
    const auto report = build_report(summaries);

    std::vector<double> fake_avg_degree;
    for (const auto& s : summaries)
        if (s.label == 1) fake_avg_degree.push_back(s.avg_degree);
    const auto direct = box_stats(fake_avg_degree);

    CHECK(report.box[0][1].min == direct.min);
    CHECK(report.box[0][1].q1 == direct.q1);
    CHECK(report.box[0][1].median == direct.median);
    CHECK(report.box[0][1].q3 == direct.q3);
    CHECK(report.box[0][1].max == direct.max);
    CHECK(report.box[0][1].mean == direct.mean);
}

TEST_CASE("class comparison reports five rows with signed directions") {
    const auto report = build_report(random_summaries(25, 29));
    const auto rows = compare_classes(report);
    REQUIRE(rows.size() == 5);
    for (std::size_t f = 0; f < 5; ++f) CHECK(rows[f].feature == kTopoFeatureNames[f]);

    CHECK(rows[0].direction == 1);
    CHECK(rows[0].mean_fake > rows[0].mean_real);
    CHECK(rows[2].direction == 1);
    for (const auto& row : rows) {
        const double diff = row.mean_fake - row.mean_real;
        const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
        CHECK(row.direction == sign);
    }
}

TEST_CASE("identical class distributions give zero directions") {
    std::vector<TopoSummary> summaries;
    for (int label = 0; label < 2; ++label)
        for (int i = 0; i < 4; ++i)
            summaries.push_back(summary("g" + std::to_string(label) + std::to_string(i),
                                        label, 2.0 + i, 0.1 * i, 10 + i));
    const auto rows = compare_classes(build_report(summaries));
    for (const auto& row : rows) {
        CHECK(row.direction == 0);
        CHECK(row.mean_real == row.mean_fake);
    }
}
