#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "core/errors.hpp"

namespace elrdyn {

// One layer of the expectation model. `sigma_sq` is the expected squared
// weight norm; `c` is the layer's gradient coefficient, i.e. the expected
// gradient norm is c / sigma. Both must stay positive and finite.
struct LayerState {
    double sigma_sq = 2.0;
    double c = 1.0;
};

struct ModelConfig {
    // Integration constant of the continuous model; sigma_sq(0) = sqrt(k0).
    double k0 = 4.0;
    // Relative tolerance used wherever two ELRs are compared for equality
    // (tie classes, flip detection, flip counting).
    double numeric_tolerance = 1e-12;
};

// Layer-wise state of the whole network. Layers are reported 1-based
// everywhere users see an index; the vector itself is 0-based.
struct NetworkState {
    std::vector<LayerState> layers;
    std::uint64_t step_index = 0;
    // Model time: sum of lambda^2 over the steps taken so far.
    double elapsed_time = 0.0;
    ModelConfig config;

    std::size_t depth() const { return layers.size(); }
};

// Throws ConfigError if any layer has a non-positive or non-finite field.
void validate_network(const NetworkState& state);

// Effective learning rate of a layer: c / sigma_sq.
double elr(const LayerState& layer);

// elr(j) / elr(k), computed as (c_j * sigma_sq_k) / (c_k * sigma_sq_j).
double elr_ratio(const LayerState& j, const LayerState& k);

// kappa_jk = sigma_j * sigma_k / sqrt(c_j * c_k) = 1 / sqrt(elr_j * elr_k).
// Stepping j and k with lambda = kappa_jk equalizes their ELRs; larger
// lambda inverts their order, smaller keeps it.
double flipping_ratio(const LayerState& j, const LayerState& k);

// One update of the norm recurrence: sigma_sq' = sigma_sq + lambda^2 c^2 / sigma_sq.
// Throws ContractError for lambda <= 0 or non-finite, OverflowError (with
// layer reported as 1) if the result is not finite.
LayerState discrete_step(const LayerState& layer, double lambda);

// Applies discrete_step to every layer, bumps step_index and adds lambda^2
// to elapsed_time. OverflowError carries the failing step and 1-based layer.
NetworkState step_network(const NetworkState& state, double lambda);

// Closed form of the continuous norm model: sigma_sq(t) = sqrt(2 c^2 t + k0).
// Requires c > 0 and t >= 0.
double continuous_sigma_sq(double c, double t, const ModelConfig& config = {});

// Indices (0-based) of the layers with minimal and maximal ELR; ties pick
// the lowest index. Requires at least one layer.
std::pair<std::size_t, std::size_t> extreme_elr_pair(const NetworkState& state);

// Flipping ratio of the extreme-ELR pair: the largest lambda that keeps the
// ELR ordering of the whole network. Degenerate cases (one layer, or all
// ELRs equal) return the self ratio sigma_sq / c of the extreme layer.
double critical_lr(const NetworkState& state);

// Flipping ratio of the two highest distinct ELR classes (layers whose ELRs
// agree within relative numeric_tolerance count as one class): stepping
// with this lambda merges the top classes without flipping any pair. If all
// layers are in one class, returns sigma_sq / c of the argmax-ELR layer.
// Throws ConfigError for networks with fewer than 2 layers.
double subcritical_lr(const NetworkState& state);

}  // namespace elrdyn
