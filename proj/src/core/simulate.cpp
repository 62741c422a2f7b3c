#include "core/simulate.hpp"

#include <cmath>
#include <limits>

#include "core/metrics.hpp"

namespace elrdyn {

namespace {

TrajectoryRow snapshot(const NetworkState& state, double lambda) {
    TrajectoryRow row;
    row.step = state.step_index;
    row.lambda = lambda;
    const SpreadReport spread = spread_report(state);
    row.kappa_crit = critical_lr(state);
    row.kappa_sub = state.depth() >= 2 ? subcritical_lr(state)
                                       : std::numeric_limits<double>::quiet_NaN();
    row.s_rel = spread.s_rel;
    const std::size_t L = state.depth();
    row.sigma_sq.resize(L);
    row.grad_norm.resize(L);
    row.elr.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const LayerState& l = state.layers[i];
        row.sigma_sq[i] = l.sigma_sq;
        row.grad_norm[i] = l.c / std::sqrt(l.sigma_sq);
        row.elr[i] = elr(l);
    }
    return row;
}

}  // namespace

SimResult simulate(const NetworkState& initial, const Schedule& schedule, std::uint64_t steps,
                   const SimulateOptions& options) {
    validate_network(initial);
    if (options.record_every < 1) {
        throw ConfigError("record_every must be at least 1");
    }
    if (!(std::isfinite(options.convergence_ratio_tolerance) &&
          options.convergence_ratio_tolerance > 0.0)) {
        throw ConfigError("convergence ratio tolerance must be positive and finite");
    }

    auto sched = schedule.clone();
    const double band = initial.config.numeric_tolerance;
    const double converge_at = std::log1p(options.convergence_ratio_tolerance);

    SimResult result;
    result.trajectory.num_layers = initial.depth();
    NetworkState state = initial;

    for (std::uint64_t i = 0; i <= steps; ++i) {
        const double lambda = sched->lr_at(i, &state);
        const bool sampled = (i % options.record_every == 0) || i == steps;
        if (sampled) {
            result.trajectory.rows.push_back(snapshot(state, lambda));
        }

        const auto [lo, hi] = extreme_elr_pair(state);
        const double log_spread = std::log(elr(state.layers[hi])) - std::log(elr(state.layers[lo]));
        if (!result.converged_at && log_spread <= converge_at) {
            result.converged_at = i;
        }
        if (i == steps) break;

        NetworkState next;
        try {
            next = step_network(state, lambda);
        } catch (const OverflowError& err) {
            if (!sampled) {
                // Keep the last finite state in a partial trajectory.
                result.trajectory.rows.push_back(snapshot(state, lambda));
            }
            result.failure = SimFailure{err.step, err.layer, err.what()};
            break;
        }

        // Flip check: did the extreme pair of this step invert its order?
        if (log_spread > band) {
            const double log_spread_after =
                std::log(elr(next.layers[hi])) - std::log(elr(next.layers[lo]));
            if (log_spread_after < -band) {
                result.trajectory.flips.push_back(FlipEvent{
                    i, hi + 1, lo + 1, lambda,
                    flipping_ratio(state.layers[lo], state.layers[hi])});
                result.trajectory.rows.back().flips += 1;
            }
        }
        state = std::move(next);
    }

    result.final_state = std::move(state);
    return result;
}

std::optional<std::uint64_t> convergence_horizon(const NetworkState& initial,
                                                 const Schedule& schedule,
                                                 double ratio_tolerance,
                                                 std::uint64_t max_steps) {
    validate_network(initial);
    if (!(std::isfinite(ratio_tolerance) && ratio_tolerance > 0.0)) {
        throw ConfigError("ratio_tolerance must be positive and finite");
    }
    auto sched = schedule.clone();
    const double converge_at = std::log1p(ratio_tolerance);
    NetworkState state = initial;
    for (std::uint64_t i = 0; i <= max_steps; ++i) {
        const auto [lo, hi] = extreme_elr_pair(state);
        const double log_spread = std::log(elr(state.layers[hi])) - std::log(elr(state.layers[lo]));
        if (log_spread <= converge_at) return i;
        if (i == max_steps) break;
        try {
            state = step_network(state, sched->lr_at(i, &state));
        } catch (const OverflowError&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace elrdyn
