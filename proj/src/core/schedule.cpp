#include "core/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace elrdyn {

namespace {

const double kPi = std::acos(-1.0);

void require_positive(double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

// Anneals from `from` to `to` as p runs 0 -> 1.
double blend(double from, double to, double p, bool cosine) {
    p = std::clamp(p, 0.0, 1.0);
    if (cosine) {
        return to + (from - to) * 0.5 * (1.0 + std::cos(kPi * p));
    }
    return from + (to - from) * p;
}

class ConstantSchedule final : public Schedule {
public:
    explicit ConstantSchedule(double lr) : lr_(lr) { require_positive(lr, "lr"); }

    double lr_at(std::uint64_t, const NetworkState*) override { return lr_; }

    std::unique_ptr<Schedule> clone() const override {
        return std::make_unique<ConstantSchedule>(lr_);
    }

private:
    double lr_;
};

class MultistepSchedule final : public Schedule {
public:
    MultistepSchedule(double lr, double gamma, std::vector<std::uint64_t> milestones)
        : lr_(lr), gamma_(gamma), milestones_(std::move(milestones)) {
        require_positive(lr, "lr");
        require_positive(gamma, "gamma");
        if (!std::is_sorted(milestones_.begin(), milestones_.end())) {
            throw ConfigError("multistep milestones must be sorted ascending");
        }
    }

    double lr_at(std::uint64_t step, const NetworkState*) override {
        const auto passed = std::upper_bound(milestones_.begin(), milestones_.end(), step) -
                            milestones_.begin();
        return lr_ * std::pow(gamma_, static_cast<double>(passed));
    }

    std::unique_ptr<Schedule> clone() const override {
        return std::make_unique<MultistepSchedule>(lr_, gamma_, milestones_);
    }

private:
    double lr_;
    double gamma_;
    std::vector<std::uint64_t> milestones_;
};

class CosineSchedule final : public Schedule {
public:
    CosineSchedule(double peak_lr, std::uint64_t total_steps, double final_div_factor)
        : peak_(peak_lr), total_(total_steps), final_div_(final_div_factor) {
        require_positive(peak_lr, "peak_lr");
        require_positive(final_div_factor, "final_div_factor");
        if (total_steps < 1) throw ConfigError("cosine total_steps must be at least 1");
    }

    double lr_at(std::uint64_t step, const NetworkState*) override {
        const double p = static_cast<double>(std::min(step, total_)) / static_cast<double>(total_);
        return blend(peak_, peak_ / final_div_, p, /*cosine=*/true);
    }

    std::unique_ptr<Schedule> clone() const override {
        return std::make_unique<CosineSchedule>(peak_, total_, final_div_);
    }

private:
    double peak_;
    std::uint64_t total_;
    double final_div_;
};

class LinearWarmupSchedule final : public Schedule {
public:
    LinearWarmupSchedule(double peak_lr, std::uint64_t warmup_steps, double div_factor)
        : peak_(peak_lr), warmup_(warmup_steps), div_(div_factor) {
        require_positive(peak_lr, "peak_lr");
        require_positive(div_factor, "div_factor");
        if (warmup_steps < 1) throw ConfigError("linear_warmup warmup_steps must be at least 1");
    }

    double lr_at(std::uint64_t step, const NetworkState*) override {
        const double p = static_cast<double>(std::min(step, warmup_)) / static_cast<double>(warmup_);
        return blend(peak_ / div_, peak_, p, /*cosine=*/false);
    }

    std::unique_ptr<Schedule> clone() const override {
        return std::make_unique<LinearWarmupSchedule>(peak_, warmup_, div_);
    }

private:
    double peak_;
    std::uint64_t warmup_;
    double div_;
};

class OneCycleSchedule final : public Schedule {
public:
    explicit OneCycleSchedule(const OneCycleParams& p) : p_(p) {
        require_positive(p.peak_lr, "peak_lr");
        require_positive(p.div_factor, "div_factor");
        require_positive(p.final_div_factor, "final_div_factor");
        if (p.total_steps < 1) throw ConfigError("one_cycle total_steps must be at least 1");
        if (!(p.pct_start > 0.0 && p.pct_start < 1.0)) {
            throw ConfigError("one_cycle pct_start must be in (0, 1)");
        }
        up_steps_ = static_cast<std::uint64_t>(
            std::llround(p.pct_start * static_cast<double>(p.total_steps)));
        up_steps_ = std::clamp<std::uint64_t>(up_steps_, 1, p.total_steps - 1);
    }

    double lr_at(std::uint64_t step, const NetworkState*) override {
        const double start = p_.peak_lr / p_.div_factor;
        const double floor = start / p_.final_div_factor;
        if (step <= up_steps_) {
            const double p = static_cast<double>(step) / static_cast<double>(up_steps_);
            return blend(start, p_.peak_lr, p, p_.cosine_anneal);
        }
        const double p = static_cast<double>(std::min(step, p_.total_steps) - up_steps_) /
                         static_cast<double>(p_.total_steps - up_steps_);
        return blend(p_.peak_lr, floor, p, p_.cosine_anneal);
    }

    std::unique_ptr<Schedule> clone() const override {
        return std::make_unique<OneCycleSchedule>(p_);
    }

private:
    OneCycleParams p_;
    std::uint64_t up_steps_;
};

class SubcriticalSchedule final : public Schedule {
public:
    SubcriticalSchedule(double safety_factor, std::optional<std::uint64_t> warmup_steps,
                        std::unique_ptr<Schedule> after)
        : rho_(safety_factor), warmup_(warmup_steps), after_(std::move(after)) {
        if (!(std::isfinite(rho_) && rho_ > 0.0 && rho_ <= 1.0)) {
            throw ConfigError("subcritical safety_factor must be in (0, 1]");
        }
        if (warmup_ && *warmup_ < 1) {
            throw ConfigError("subcritical warmup_steps must be at least 1");
        }
    }

    double lr_at(std::uint64_t step, const NetworkState* state) override {
        if (!warmup_) {
            if (!state) {
                throw ContractError("subcritical_warmup needs a network state");
            }
            warmup_ = state->depth();
        }
        if (step < *warmup_) {
            if (!state) {
                throw ContractError("subcritical_warmup needs a network state");
            }
            held_ = rho_ * subcritical_lr(*state);
            return *held_;
        }
        if (after_) {
            return after_->lr_at(step - *warmup_, state);
        }
        if (held_) {
            return *held_;
        }
        // Queried past warm-up without having seen the warm-up itself; fall
        // back to the live value so the result is still well defined.
        if (!state) {
            throw ContractError("subcritical_warmup needs a network state");
        }
        return rho_ * subcritical_lr(*state);
    }

    bool needs_state() const override { return true; }

    std::unique_ptr<Schedule> clone() const override {
        auto copy = std::make_unique<SubcriticalSchedule>(
            rho_, warmup_, after_ ? after_->clone() : nullptr);
        copy->held_ = held_;
        return copy;
    }

private:
    double rho_;
    std::optional<std::uint64_t> warmup_;
    std::unique_ptr<Schedule> after_;
    std::optional<double> held_;
};

class CompositeSchedule final : public Schedule {
public:
    explicit CompositeSchedule(std::vector<SchedulePhase> phases) : phases_(std::move(phases)) {
        if (phases_.empty()) throw ConfigError("composite schedule needs at least one phase");
        for (std::size_t i = 0; i < phases_.size(); ++i) {
            if (!phases_[i].schedule) throw ConfigError("composite phase without a schedule");
            if (!phases_[i].steps && i + 1 != phases_.size()) {
                throw ConfigError("only the last composite phase may omit steps");
            }
            if (phases_[i].steps && *phases_[i].steps < 1) {
                throw ConfigError("composite phase steps must be at least 1");
            }
        }
    }

    double lr_at(std::uint64_t step, const NetworkState* state) override {
        std::uint64_t local = step;
        for (std::size_t i = 0; i < phases_.size(); ++i) {
            const bool last = i + 1 == phases_.size();
            if (last || local < *phases_[i].steps) {
                return phases_[i].schedule->lr_at(local, state);
            }
            local -= *phases_[i].steps;
        }
        // Unreachable: the last phase catches everything.
        throw ContractError("composite schedule exhausted");
    }

    bool needs_state() const override {
        for (const auto& p : phases_) {
            if (p.schedule->needs_state()) return true;
        }
        return false;
    }

    std::unique_ptr<Schedule> clone() const override {
        std::vector<SchedulePhase> copy;
        copy.reserve(phases_.size());
        for (const auto& p : phases_) {
            copy.push_back(SchedulePhase{p.schedule->clone(), p.steps});
        }
        return std::make_unique<CompositeSchedule>(std::move(copy));
    }

private:
    std::vector<SchedulePhase> phases_;
};

}  // namespace

std::unique_ptr<Schedule> make_constant(double lr) {
    return std::make_unique<ConstantSchedule>(lr);
}

std::unique_ptr<Schedule> make_multistep(double lr, double gamma,
                                         std::vector<std::uint64_t> milestones) {
    return std::make_unique<MultistepSchedule>(lr, gamma, std::move(milestones));
}

std::unique_ptr<Schedule> make_cosine(double peak_lr, std::uint64_t total_steps,
                                      double final_div_factor) {
    return std::make_unique<CosineSchedule>(peak_lr, total_steps, final_div_factor);
}

std::unique_ptr<Schedule> make_linear_warmup(double peak_lr, std::uint64_t warmup_steps,
                                             double div_factor) {
    return std::make_unique<LinearWarmupSchedule>(peak_lr, warmup_steps, div_factor);
}

std::unique_ptr<Schedule> make_one_cycle(const OneCycleParams& params) {
    return std::make_unique<OneCycleSchedule>(params);
}

std::unique_ptr<Schedule> make_subcritical(double safety_factor,
                                           std::optional<std::uint64_t> warmup_steps,
                                           std::unique_ptr<Schedule> after) {
    return std::make_unique<SubcriticalSchedule>(safety_factor, warmup_steps, std::move(after));
}

std::unique_ptr<Schedule> make_composite(std::vector<SchedulePhase> phases) {
    return std::make_unique<CompositeSchedule>(std::move(phases));
}

}  // namespace elrdyn
