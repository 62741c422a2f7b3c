#include "core/model.hpp"

#include <cmath>
#include <string>

namespace elrdyn {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_lambda(double lambda) {
    if (!positive_finite(lambda)) {
        throw ContractError("lambda must be positive and finite, got " + std::to_string(lambda));
    }
}

}  // namespace

void validate_network(const NetworkState& state) {
    if (state.layers.empty()) {
        throw ConfigError("network needs at least one layer");
    }
    for (std::size_t i = 0; i < state.layers.size(); ++i) {
        const LayerState& l = state.layers[i];
        if (!positive_finite(l.sigma_sq)) {
            throw ConfigError("layer " + std::to_string(i + 1) + ": sigma_sq must be positive and finite");
        }
        if (!positive_finite(l.c)) {
            throw ConfigError("layer " + std::to_string(i + 1) + ": c must be positive and finite");
        }
    }
    if (!positive_finite(state.config.k0)) {
        throw ConfigError("k0 must be positive and finite");
    }
    if (!positive_finite(state.config.numeric_tolerance)) {
        throw ConfigError("numeric_tolerance must be positive and finite");
    }
}

double elr(const LayerState& layer) { return layer.c / layer.sigma_sq; }

double elr_ratio(const LayerState& j, const LayerState& k) {
    return (j.c * k.sigma_sq) / (k.c * j.sigma_sq);
}

double flipping_ratio(const LayerState& j, const LayerState& k) {
    // Factored as 1/sqrt(E_j) * 1/sqrt(E_k) so huge sigma_sq values cannot
    // overflow in an intermediate product.
    return std::sqrt(j.sigma_sq / j.c) * std::sqrt(k.sigma_sq / k.c);
}

LayerState discrete_step(const LayerState& layer, double lambda) {
    require_lambda(lambda);
    const double grown = layer.sigma_sq + (lambda * lambda) * (layer.c * layer.c) / layer.sigma_sq;
    if (!std::isfinite(grown)) {
        throw OverflowError(0, 1);
    }
    return LayerState{grown, layer.c};
}

NetworkState step_network(const NetworkState& state, double lambda) {
    require_lambda(lambda);
    NetworkState next = state;
    for (std::size_t i = 0; i < next.layers.size(); ++i) {
        LayerState& l = next.layers[i];
        l.sigma_sq += (lambda * lambda) * (l.c * l.c) / l.sigma_sq;
        if (!std::isfinite(l.sigma_sq)) {
            throw OverflowError(state.step_index, i + 1);
        }
    }
    next.step_index = state.step_index + 1;
    next.elapsed_time = state.elapsed_time + lambda * lambda;
    return next;
}

double continuous_sigma_sq(double c, double t, const ModelConfig& config) {
    if (!positive_finite(c)) {
        throw ContractError("c must be positive and finite");
    }
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw ContractError("t must be non-negative and finite");
    }
    return std::sqrt(2.0 * c * c * t + config.k0);
}

std::pair<std::size_t, std::size_t> extreme_elr_pair(const NetworkState& state) {
    if (state.layers.empty()) {
        throw ContractError("extreme_elr_pair needs at least one layer");
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 1; i < state.layers.size(); ++i) {
        const double e = elr(state.layers[i]);
        if (e < elr(state.layers[lo])) lo = i;
        if (e > elr(state.layers[hi])) hi = i;
    }
    return {lo, hi};
}

double critical_lr(const NetworkState& state) {
    const auto [lo, hi] = extreme_elr_pair(state);
    return flipping_ratio(state.layers[lo], state.layers[hi]);
}

double subcritical_lr(const NetworkState& state) {
    if (state.layers.size() < 2) {
        throw ConfigError("subcritical_lr needs at least 2 layers");
    }
    std::size_t top = 0;
    for (std::size_t i = 1; i < state.layers.size(); ++i) {
        if (elr(state.layers[i]) > elr(state.layers[top])) top = i;
    }
    const double e_top = elr(state.layers[top]);
    // Highest ELR outside the top tie class. Layers equal to the max within
    // the relative tolerance evolve in lockstep, so pairing two of them
    // would make no progress.
    const double cutoff = e_top * (1.0 - state.config.numeric_tolerance);
    bool found = false;
    std::size_t second = 0;
    for (std::size_t i = 0; i < state.layers.size(); ++i) {
        const double e = elr(state.layers[i]);
        if (e >= cutoff) continue;
        if (!found || e > elr(state.layers[second])) {
            second = i;
            found = true;
        }
    }
    if (!found) {
        // Every layer already shares the max ELR.
        return state.layers[top].sigma_sq / state.layers[top].c;
    }
    return flipping_ratio(state.layers[top], state.layers[second]);
}

}  // namespace elrdyn
