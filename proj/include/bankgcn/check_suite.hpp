#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bankgcn/model.hpp"

namespace bankgcn {

/// Erdos-Renyi graph on n nodes with Gaussian features. With `no_isolated`, a
/// random spanning tree is laid down first so every node has a neighbor.
Graph random_graph(std::mt19937_64& rng, Index n, double edge_probability, Index feature_dim, int label,
                   bool no_isolated);

struct CheckOptions {
    std::uint64_t seed = 0;
    bool inject_fault = false;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

CheckResult check_spectral_equivalence(std::mt19937_64& rng, int trials = 100);
CheckResult check_gcn_equivalence(std::mt19937_64& rng, int trials = 50);
CheckResult check_permutation_invariance(std::mt19937_64& rng, int trials = 50);
CheckResult check_gradients(std::mt19937_64& rng, bool inject_fault);
CheckResult check_diversity_bounds(std::mt19937_64& rng, int trials = 1000);

std::vector<CheckResult> run_check_suite(const CheckOptions& options);

std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace bankgcn
