#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsprop/tensor.hpp"

namespace newsprop {

using Edge = std::pair<int, int>;

// One news cascade: users who shared an item, undirected retweet relations,
// per-node feature vectors, the news node (root) and a binary label.
// Instances are immutable by convention once validated; all operations on
// them are pure functions.
struct PropagationGraph {
    std::string id;
    int num_nodes = 0;
    std::vector<Edge> edges;  // unordered pairs, no self-loops, no duplicates
    Tensor2D features;        // num_nodes x feat_dim
    int root = 0;
    int label = 0;            // 0 = real, 1 = fake

    int feat_dim() const { return static_cast<int>(features.cols()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
};

enum class Split { Train, Val, Test };

const char* split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

struct GraphDataset {
    std::string name;  // provenance tag used in reports (file stem, synth id)
    std::vector<PropagationGraph> graphs;
    std::unordered_map<std::string, Split> splits;  // graph id -> split

    bool has_splits() const { return !splits.empty(); }
    int feat_dim() const;
    // Indices of graphs in `split`, in dataset order.
    std::vector<std::size_t> split_indices(Split split) const;
};

// Block-diagonal concatenation of graphs. Node indices of graph k are offset
// by the total node count of graphs 0..k-1; membership maps each node to its
// graph index and is non-decreasing.
struct BatchedGraph {
    int total_nodes = 0;
    int num_graphs = 0;
    std::vector<Edge> edges;
    Tensor2D features;
    std::vector<int> membership;
    std::vector<int> labels;
    std::vector<int> roots;
    std::vector<std::string> ids;

    int feat_dim() const { return static_cast<int>(features.cols()); }
};

// Compressed sorted adjacency of an undirected edge list (both directions
// materialized). Shared primitive for metrics and message passing.
struct Adjacency {
    std::vector<int> offsets;    // size num_nodes + 1
    std::vector<int> neighbors;  // sorted within each node's range

    int degree(int v) const { return offsets[v + 1] - offsets[v]; }
    const int* begin(int v) const { return neighbors.data() + offsets[v]; }
    const int* end(int v) const { return neighbors.data() + offsets[v + 1]; }
};

Adjacency build_adjacency(int num_nodes, const std::vector<Edge>& edges);

struct ValidationResult {
    bool ok = true;
    std::string code;     // IndexOutOfRange, SelfLoop, DuplicateEdge, RaggedFeatureMatrix
    std::string message;  // names the offending edge/row
};

// Checks every PropagationGraph invariant; reports the first violation.
ValidationResult validate_graph(const PropagationGraph& g);
// Throws DataError with the validation code on the first violation.
void require_valid(const PropagationGraph& g);

// Sorted, duplicate-free adjacency of v. Throws IndexOutOfRange.
std::vector<int> neighbors(const PropagationGraph& g, int v);

// Concatenates graphs into one block-diagonal batch.
// Throws EmptyBatch / FeatureDimMismatch.
BatchedGraph batch_graphs(const std::vector<PropagationGraph>& graphs);

// Exact inverse of batch_graphs.
std::vector<PropagationGraph> unbatch(const BatchedGraph& batch);

struct SplitFractions {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

// Deterministic label-stratified split. Sizes follow the global rule
// floor-each-then-remainder-to-train; per-class allocation stays within one
// graph of proportional. Every class keeps at least one training graph.
// Throws BadFractions / ClassMissing.
GraphDataset split_dataset(const GraphDataset& ds, const SplitFractions& fractions,
                           std::uint64_t seed);

} // namespace newsprop
