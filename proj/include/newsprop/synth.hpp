#pragma once

#include <cstdint>
#include <string>

#include "newsprop/graph.hpp"

namespace newsprop {

// Seeded cascade generator. Each graph is a random recursive tree from root 0
// (a share cascade), after which every open wedge of the tree closes into a
// triangle with probability base_closure + label * structure_signal, so the
// clustering coefficient separates the classes by exactly that knob. Features
// are i.i.d. standard normal with label * feature_signal added to the first
// 8 coordinates.
struct SynthConfig {
    int graphs_per_class = 100;
    int min_nodes = 10;
    int max_nodes = 40;
    std::size_t feat_dim = 16;
    double structure_signal = 0.0;
    double feature_signal = 0.0;
    double base_closure = 0.05;
    std::uint64_t seed = 0;
    std::string name = "synthetic";

    void validate() const;
};

GraphDataset generate(const SynthConfig& config);

} // namespace newsprop
