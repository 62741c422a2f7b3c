#pragma once

#include <cstddef>
#include <vector>

#include "core/model.hpp"

namespace elrdyn {

enum class ProfileKind {
    feedforward,      // c_i = alpha^(L - i), steepest at the input
    resnet,           // c_i = 1 + floor((L - i) / block_size) * alpha^block_size
    uniform,          // c_i = 1
    explicit_values,  // c_i supplied by the caller
};

// Default growth factor per layer: sqrt(pi / (pi - 1)).
double default_alpha();

struct ProfileSpec {
    ProfileKind kind = ProfileKind::feedforward;
    std::size_t depth = 1;  // L; layer 1 is the input side, layer L the output
    double alpha = default_alpha();
    std::size_t block_size = 2;               // resnet only: layers per stage
    double initial_sigma_sq = 2.0;            // start value for every layer
    std::vector<double> c;                    // explicit_values only; length L
    std::vector<double> sigma_sq;             // optional per-layer start values
};

// The c values a spec produces, index 0 = layer 1. Throws ConfigError for
// invalid specs (depth 0, non-positive alpha, length mismatches, ...).
std::vector<double> profile_c(const ProfileSpec& spec);

// Builds the initial network state for a spec.
NetworkState make_network(const ProfileSpec& spec, ModelConfig config = {});

}  // namespace elrdyn
