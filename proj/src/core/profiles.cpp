#include "core/profiles.hpp"

#include <cmath>
#include <string>

namespace elrdyn {

double default_alpha() {
    static const double pi = std::acos(-1.0);
    return std::sqrt(pi / (pi - 1.0));
}

namespace {

void validate_spec(const ProfileSpec& spec) {
    if (spec.depth < 1) {
        throw ConfigError("profile depth must be at least 1");
    }
    if (!(std::isfinite(spec.alpha) && spec.alpha > 0.0)) {
        throw ConfigError("profile alpha must be positive and finite");
    }
    if (spec.kind == ProfileKind::resnet && spec.block_size < 1) {
        throw ConfigError("resnet block_size must be at least 1");
    }
    if (!(std::isfinite(spec.initial_sigma_sq) && spec.initial_sigma_sq > 0.0)) {
        throw ConfigError("initial_sigma_sq must be positive and finite");
    }
    if (spec.kind == ProfileKind::explicit_values) {
        if (spec.c.size() != spec.depth) {
            throw ConfigError("explicit profile: c has " + std::to_string(spec.c.size()) +
                              " entries, depth is " + std::to_string(spec.depth));
        }
    } else if (!spec.c.empty()) {
        throw ConfigError("c values are only allowed for the explicit profile kind");
    }
    if (!spec.sigma_sq.empty() && spec.sigma_sq.size() != spec.depth) {
        throw ConfigError("per-layer sigma_sq has " + std::to_string(spec.sigma_sq.size()) +
                          " entries, depth is " + std::to_string(spec.depth));
    }
}

}  // namespace

std::vector<double> profile_c(const ProfileSpec& spec) {
    validate_spec(spec);
    const std::size_t L = spec.depth;
    std::vector<double> c(L);
    switch (spec.kind) {
        case ProfileKind::feedforward:
            for (std::size_t i = 0; i < L; ++i) {
                c[i] = std::pow(spec.alpha, static_cast<double>(L - 1 - i));
            }
            break;
        case ProfileKind::resnet: {
            const double stage_gain = std::pow(spec.alpha, static_cast<double>(spec.block_size));
            for (std::size_t i = 0; i < L; ++i) {
                const std::size_t stages_above = (L - 1 - i) / spec.block_size;
                c[i] = 1.0 + static_cast<double>(stages_above) * stage_gain;
            }
            break;
        }
        case ProfileKind::uniform:
            for (std::size_t i = 0; i < L; ++i) c[i] = 1.0;
            break;
        case ProfileKind::explicit_values:
            c = spec.c;
            break;
    }
    for (std::size_t i = 0; i < L; ++i) {
        if (!(std::isfinite(c[i]) && c[i] > 0.0)) {
            throw ConfigError("layer " + std::to_string(i + 1) + ": c must be positive and finite");
        }
    }
    return c;
}

NetworkState make_network(const ProfileSpec& spec, ModelConfig config) {
    const std::vector<double> c = profile_c(spec);
    NetworkState state;
    state.config = config;
    state.layers.resize(spec.depth);
    for (std::size_t i = 0; i < spec.depth; ++i) {
        state.layers[i].c = c[i];
        state.layers[i].sigma_sq = spec.sigma_sq.empty() ? spec.initial_sigma_sq : spec.sigma_sq[i];
    }
    validate_network(state);
    return state;
}

}  // namespace elrdyn
