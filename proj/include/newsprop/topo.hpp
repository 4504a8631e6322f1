#pragma once

#include <string>
#include <vector>

#include "newsprop/graph.hpp"

namespace newsprop {

// The five graph-level statistics used throughout the analysis pipeline.
struct TopoSummary {
    double avg_degree = 0.0;
    double mean_degree_centrality = 0.0;  // in [0,1]
    double mean_clustering = 0.0;         // in [0,1]
    double density = 0.0;                 // in [0,1]
    int node_count = 0;
    int label = 0;
    std::string graph_id;
};

// deg(v) / (n-1); zero for the single-node graph.
std::vector<double> degree_centrality(const PropagationGraph& g);

// 2*T(v) / (deg(v)*(deg(v)-1)) where T(v) counts edges among the neighbors
// of v; zero when deg(v) < 2. Sorted-adjacency intersection.
std::vector<double> local_clustering(const PropagationGraph& g);

// Same contract as local_clustering, computed by exhaustive enumeration of
// all (v, u, w) triples. Test oracle only; throws TooLarge above 200 nodes.
std::vector<double> clustering_oracle(const PropagationGraph& g);

// 2m / (n(n-1)) for n >= 2, else 0.
double graph_density(const PropagationGraph& g);
// 2m / n.
double average_degree(const PropagationGraph& g);

// Appends [degree_centrality, local_clustering] columns to the node features.
// Original columns are copied bit-identically; column order is fixed so
// serialized datasets stay portable.
PropagationGraph augment_features(const PropagationGraph& g);

TopoSummary summarize(const PropagationGraph& g);

} // namespace newsprop
