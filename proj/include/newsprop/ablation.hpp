#pragma once

#include <cstdint>
#include <string>

#include "newsprop/graph.hpp"
#include "newsprop/train.hpp"

namespace newsprop {

// Same node count, edge count, features, label, root; edges resampled
// uniformly without replacement from all unordered non-self pairs.
PropagationGraph randomize_edges(const PropagationGraph& g, std::uint64_t seed);

// Degree-preserving alternative: repeated double-edge swaps. Keeps every
// node's degree; still destroys the specific wiring.
PropagationGraph randomize_edges_preserve_degrees(const PropagationGraph& g,
                                                  std::uint64_t seed);

// Same topology, label, root; features replaced by i.i.d. standard normals.
PropagationGraph gaussian_features(const PropagationGraph& g, std::uint64_t seed);

struct AblationReport {
    double accuracy_original = 0.0;
    double accuracy_feature_only = 0.0;    // randomized edges, features kept
    double accuracy_structure_only = 0.0;  // Gaussian features, topology kept
    double degradation_structure = 0.0;    // original - feature_only
    double degradation_features = 0.0;     // original - structure_only
    std::uint64_t seed = 0;
    std::string dataset;
};

// Trains three models with the same config: on the untouched dataset, on a
// copy with every graph's edges randomized, and on a copy with every graph's
// features replaced by noise. Reports test accuracy per setting. Ablations
// apply to all splits; augmentation for bettergnn is recomputed from each
// setting's own topology inside train().
AblationReport run_ablation(const GraphDataset& dataset, const TrainConfig& config,
                            bool preserve_degrees = false);

} // namespace newsprop
