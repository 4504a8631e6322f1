#pragma once

#include <array>
#include <string>
#include <vector>

#include "newsprop/topo.hpp"

namespace newsprop {

// Fixed feature order shared by the correlation matrix, box stats, and the
// serialized report files.
inline constexpr std::array<const char*, 5> kTopoFeatureNames = {
    "avg_degree", "mean_degree_centrality", "mean_clustering", "density", "node_count"};

struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

// Quartiles by linear interpolation at rank (n-1)*q over the sorted values.
BoxStats box_stats(std::vector<double> values);

// Pearson correlation; series must have equal positive length.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct TopoReport {
    // [feature][class]: class 0 = real, 1 = fake.
    std::array<std::array<BoxStats, 2>, 5> box{};

    struct ScatterPoint {
        double avg_degree = 0.0;
        double mean_clustering = 0.0;
        int label = 0;
        std::string graph_id;
    };
    std::vector<ScatterPoint> scatter;  // sorted by graph_id

    struct Histogram {
        std::vector<double> edges;                 // 21 edges for 20 bins
        std::array<std::vector<long>, 2> counts;   // per class, 20 bins
    };
    Histogram node_count_histogram;

    std::array<std::array<double, 5>, 5> correlation{};
    std::array<bool, 5> degenerate{};  // zero-variance features, entries zeroed
};

// Needs at least 2 summaries per class. Order-invariant: summaries are
// canonicalized by graph_id before any accumulation.
TopoReport build_report(const std::vector<TopoSummary>& summaries);

struct ClassComparison {
    std::string feature;
    double mean_real = 0.0;
    double mean_fake = 0.0;
    int direction = 0;  // sign of (fake - real)
};

// One row per feature, in kTopoFeatureNames order. Descriptive only.
std::vector<ClassComparison> compare_classes(const TopoReport& report);

} // namespace newsprop
