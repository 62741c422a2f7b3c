#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "core/model.hpp"

namespace elrdyn {

// A learning-rate schedule. All kinds except subcritical warm-up are pure
// functions of the step index; subcritical warm-up reads the network state
// and remembers the last lambda it produced (so evaluate it in step order).
class Schedule {
public:
    virtual ~Schedule() = default;

    // Lambda to apply at `step`. `state` may be null for pure kinds; kinds
    // that need it throw ContractError when it is missing.
    virtual double lr_at(std::uint64_t step, const NetworkState* state) = 0;

    virtual bool needs_state() const { return false; }

    virtual std::unique_ptr<Schedule> clone() const = 0;
};

std::unique_ptr<Schedule> make_constant(double lr);

// lambda(step) = lr * gamma^(number of milestones <= step).
std::unique_ptr<Schedule> make_multistep(double lr, double gamma,
                                         std::vector<std::uint64_t> milestones);

// Cosine decay from peak_lr to peak_lr / final_div_factor over total_steps,
// holding the floor afterwards.
std::unique_ptr<Schedule> make_cosine(double peak_lr, std::uint64_t total_steps,
                                      double final_div_factor);

// Linear ramp from peak_lr / div_factor up to peak_lr over warmup_steps,
// holding the peak afterwards.
std::unique_ptr<Schedule> make_linear_warmup(double peak_lr, std::uint64_t warmup_steps,
                                             double div_factor);

struct OneCycleParams {
    double peak_lr = 0.1;
    std::uint64_t total_steps = 1;
    double pct_start = 0.1;          // fraction of total_steps spent ramping up
    double div_factor = 20.0;        // start = peak / div_factor
    double final_div_factor = 2000.0;  // floor = start / final_div_factor
    bool cosine_anneal = true;       // false: linear ramps
};

// Single ramp up to peak_lr then anneal down to the floor; operates on step
// counts, not epochs.
std::unique_ptr<Schedule> make_one_cycle(const OneCycleParams& params);

// safety_factor * subcritical_lr(state) for the first warmup_steps steps
// (default: one step per layer, resolved from the first state seen), then
// hands over to `after`, or holds the last warm-up lambda if `after` is null.
std::unique_ptr<Schedule> make_subcritical(double safety_factor,
                                           std::optional<std::uint64_t> warmup_steps,
                                           std::unique_ptr<Schedule> after);

struct SchedulePhase {
    std::unique_ptr<Schedule> schedule;
    // Steps this phase covers; unset is only allowed for the last phase,
    // which then runs forever. Each phase sees step indices from 0.
    std::optional<std::uint64_t> steps;
};

std::unique_ptr<Schedule> make_composite(std::vector<SchedulePhase> phases);

}  // namespace elrdyn
