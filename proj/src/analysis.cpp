#include "newsprop/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "newsprop/errors.hpp"

namespace newsprop {

BoxStats box_stats(std::vector<double> values) {
    if (values.empty())
        throw DataError("EmptySplit", "box stats of an empty series");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();

    const auto quantile = [&](double q) {
        const double rank = q * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(rank);
        const double frac = rank - static_cast<double>(lo);
        if (lo + 1 >= n) return values[n - 1];
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };

    BoxStats out;
    out.min = values.front();
    out.q1 = quantile(0.25);
    out.median = quantile(0.5);
    out.q3 = quantile(0.75);
    out.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(n);
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw DataError("ShapeMismatch", "pearson needs equal-length non-empty series");
    const auto n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw DataError("DegenerateFeature", "zero variance series in correlation");
    const double r = cov / std::sqrt(var_a * var_b);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

std::array<double, 5> feature_row(const TopoSummary& s) {
    return {s.avg_degree, s.mean_degree_centrality, s.mean_clustering, s.density,
            static_cast<double>(s.node_count)};
}

} // namespace

TopoReport build_report(const std::vector<TopoSummary>& summaries) {
    // Canonical order makes every accumulation below independent of the
    // caller's ordering.
    std::vector<TopoSummary> sorted = summaries;
    std::sort(sorted.begin(), sorted.end(),
              [](const TopoSummary& a, const TopoSummary& b) { return a.graph_id < b.graph_id; });

    std::array<std::size_t, 2> class_count{};
    for (const auto& s : sorted) {
        if (s.label != 0 && s.label != 1)
            throw DataError("LabelOutOfRange",
                            "summary " + s.graph_id + " has label " + std::to_string(s.label));
        class_count[static_cast<std::size_t>(s.label)] += 1;
    }
    if (class_count[0] < 2 || class_count[1] < 2)
        throw DataError("TooFewSummaries",
                        "need at least 2 summaries per class, got " +
                            std::to_string(class_count[0]) + " real and " +
                            std::to_string(class_count[1]) + " fake");

    TopoReport report;

    for (std::size_t f = 0; f < 5; ++f) {
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<double> values;
            values.reserve(class_count[c]);
            for (const auto& s : sorted)
                if (static_cast<std::size_t>(s.label) == c) values.push_back(feature_row(s)[f]);
            report.box[f][c] = box_stats(std::move(values));
        }
    }

    report.scatter.reserve(sorted.size());
    for (const auto& s : sorted)
        report.scatter.push_back({s.avg_degree, s.mean_clustering, s.label, s.graph_id});

    // Node-count histogram: 20 equal-width bins over the pooled range.
    {
        double lo = static_cast<double>(sorted.front().node_count);
        double hi = lo;
        for (const auto& s : sorted) {
            lo = std::min(lo, static_cast<double>(s.node_count));
            hi = std::max(hi, static_cast<double>(s.node_count));
        }
        if (hi == lo) hi = lo + 1.0;  // degenerate range widens to one unit
        constexpr std::size_t kBins = 20;
        const double width = (hi - lo) / static_cast<double>(kBins);
        auto& hist = report.node_count_histogram;
        hist.edges.resize(kBins + 1);
        for (std::size_t b = 0; b <= kBins; ++b)
            hist.edges[b] = lo + static_cast<double>(b) * width;
        hist.counts[0].assign(kBins, 0);
        hist.counts[1].assign(kBins, 0);
        for (const auto& s : sorted) {
            auto bin = static_cast<std::size_t>(
                (static_cast<double>(s.node_count) - lo) / width);
            bin = std::min(bin, kBins - 1);
            hist.counts[static_cast<std::size_t>(s.label)][bin] += 1;
        }
    }

    // Pooled Pearson matrix with degenerate features zeroed off-diagonal.
    std::array<std::vector<double>, 5> columns;
    for (auto& col : columns) col.reserve(sorted.size());
    for (const auto& s : sorted) {
        const auto row = feature_row(s);
        for (std::size_t f = 0; f < 5; ++f) columns[f].push_back(row[f]);
    }
    for (std::size_t f = 0; f < 5; ++f) {
        const double first = columns[f].front();
        report.degenerate[f] = std::all_of(columns[f].begin(), columns[f].end(),
                                           [&](double v) { return v == first; });
    }
    for (std::size_t f = 0; f < 5; ++f) {
        report.correlation[f][f] = 1.0;
        for (std::size_t g = f + 1; g < 5; ++g) {
            const double r = (report.degenerate[f] || report.degenerate[g])
                                 ? 0.0
                                 : pearson(columns[f], columns[g]);
            report.correlation[f][g] = r;
            report.correlation[g][f] = r;
        }
    }

    return report;
}

std::vector<ClassComparison> compare_classes(const TopoReport& report) {
    std::vector<ClassComparison> out;
    out.reserve(5);
    for (std::size_t f = 0; f < 5; ++f) {
        ClassComparison row;
        row.feature = kTopoFeatureNames[f];
        row.mean_real = report.box[f][0].mean;
        row.mean_fake = report.box[f][1].mean;
        const double delta = row.mean_fake - row.mean_real;
        row.direction = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace newsprop
