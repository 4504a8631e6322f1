#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "newsprop/nn.hpp"

namespace newsprop {

struct GradCheckCase {
    std::string name;
    GradCheckReport report;
};

// Central-difference verification of every layer type in isolation plus all
// four full models on a 4-graph toy batch (eval-mode batchnorm, dropout 0).
// Deterministic per seed.
std::vector<GradCheckCase> run_standard_grad_checks(std::uint64_t seed, double epsilon,
                                                    double tolerance,
                                                    std::size_t max_samples);

// Throws CheckError naming the first failing case, if any.
void require_all_passed(const std::vector<GradCheckCase>& cases);

} // namespace newsprop
