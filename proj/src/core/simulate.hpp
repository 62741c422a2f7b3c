#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/schedule.hpp"

namespace elrdyn {

// Snapshot of the network at one recorded step. Vectors are indexed 0-based;
// the matching report columns are numbered 1-based.
struct TrajectoryRow {
    std::uint64_t step = 0;
    double lambda = 0.0;      // lambda the schedule produces at this step
    double kappa_crit = 0.0;  // flipping ratio of the extreme-ELR pair
    double kappa_sub = 0.0;   // subcritical lambda; NaN for single-layer nets
    double s_rel = 0.0;       // population std of ln ELR across layers
    // Flip events in [this row's step, next recorded row's step); with
    // record_every = 1 this is simply 0 or 1 per step.
    std::uint32_t flips = 0;
    std::vector<double> sigma_sq;   // squared weight norm per layer
    std::vector<double> grad_norm;  // c / sigma per layer
    std::vector<double> elr;        // c / sigma_sq per layer
};

// The extreme-ELR pair of step `step` inverted its order during that step.
struct FlipEvent {
    std::uint64_t step = 0;
    std::size_t high_layer = 0;  // 1-based; argmax ELR before the step
    std::size_t low_layer = 0;   // 1-based; argmin ELR before the step
    double lambda = 0.0;
    double kappa = 0.0;          // flipping ratio of the pair before the step
};

struct SimFailure {
    std::uint64_t step = 0;
    std::size_t layer = 0;  // 1-based
    std::string message;
};

struct Trajectory {
    std::size_t num_layers = 0;
    std::vector<TrajectoryRow> rows;
    std::vector<FlipEvent> flips;  // always full resolution
};

struct SimulateOptions {
    std::uint64_t record_every = 1;
    // Convergence means max pairwise |ln elr_ratio| <= ln(1 + this).
    double convergence_ratio_tolerance = 1e-9;
};

struct SimResult {
    Trajectory trajectory;
    NetworkState final_state;
    // First step at which the convergence criterion held, if any.
    std::optional<std::uint64_t> converged_at;
    // Set when a step overflowed; the trajectory then ends at the last
    // finite state and covers fewer than the requested steps.
    std::optional<SimFailure> failure;
};

// Runs `steps` updates of the norm recurrence under `schedule`, recording
// every record_every-th step plus the final state. The schedule is cloned,
// so stateful schedules can be reused across calls.
SimResult simulate(const NetworkState& initial, const Schedule& schedule, std::uint64_t steps,
                   const SimulateOptions& options = {});

// First step at which max pairwise |ln elr_ratio| <= ln(1 + ratio_tolerance),
// scanning at full resolution up to max_steps (inclusive, since the state
// after the last step counts). Returns nullopt if never reached, or if the
// run overflows first.
std::optional<std::uint64_t> convergence_horizon(const NetworkState& initial,
                                                 const Schedule& schedule,
                                                 double ratio_tolerance,
                                                 std::uint64_t max_steps);

}  // namespace elrdyn
