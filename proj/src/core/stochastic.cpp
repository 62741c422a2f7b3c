#include "core/stochastic.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

namespace elrdyn {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void require_positive(double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

double MatrixLayer::norm_sq() const { return dot(w, w); }

MatrixLayer init_matrix_layer(std::size_t rows, std::size_t cols, double c,
                              double initial_sigma_sq, const StreamId& stream) {
    if (rows < 1 || cols < 1) throw ConfigError("matrix layers need rows >= 1 and cols >= 1");
    require_positive(c, "c");
    require_positive(initial_sigma_sq, "initial_sigma_sq");
    MatrixLayer layer;
    layer.rows = rows;
    layer.cols = cols;
    layer.c = c;
    layer.stream = stream;
    layer.w.resize(rows * cols);
    NormalStream rng(stream, /*step_tag=*/0);
    rng.fill(layer.w.data(), layer.w.size(),
             std::sqrt(initial_sigma_sq / static_cast<double>(rows * cols)));
    return layer;
}

GradientDraw draw_step_gradient(const MatrixLayer& layer,
                                const std::optional<ConstrainPolicy>& policy) {
    GradientDraw draw;
    const double wnorm_sq = layer.norm_sq();
    if (!(std::isfinite(wnorm_sq) && wnorm_sq > 0.0)) {
        throw OverflowError(layer.step_index, layer.stream.layer + 1);
    }
    const double entries = static_cast<double>(layer.size());
    // Per-entry std chosen so the expected squared gradient norm is
    // c^2 / |W|^2, the norm-coupled scale of the expectation model.
    const double entry_std = (layer.c / std::sqrt(wnorm_sq)) / std::sqrt(entries);

    draw.gradient.resize(layer.size());
    NormalStream rng(layer.stream, layer.step_index + 1);
    rng.fill(draw.gradient.data(), draw.gradient.size(), entry_std);

    // Remove the component along W so the step never rescales the weights,
    // it only rotates them.
    const double along = dot(draw.gradient, layer.w) / wnorm_sq;
    for (std::size_t i = 0; i < draw.gradient.size(); ++i) {
        draw.gradient[i] -= along * layer.w[i];
    }

    double gnorm_sq = dot(draw.gradient, draw.gradient);
    if (policy) {
        if (!(std::isfinite(policy->epsilon) && policy->epsilon > 0.0)) {
            throw ConfigError("constrain epsilon must be positive and finite");
        }
        require_positive(policy->e_goal, "constrain e_goal");
        const double measured = std::sqrt(gnorm_sq / wnorm_sq);
        const double scale = policy->e_goal / (measured + policy->epsilon);
        for (double& g : draw.gradient) g *= scale;
        gnorm_sq *= scale * scale;
    }

    draw.stats.wnorm_sq = wnorm_sq;
    draw.stats.gnorm_sq = gnorm_sq;
    draw.stats.elr = std::sqrt(gnorm_sq / wnorm_sq);
    if (gnorm_sq > 0.0) {
        draw.stats.ortho_error =
            std::fabs(dot(draw.gradient, layer.w)) / std::sqrt(gnorm_sq * wnorm_sq);
    }
    return draw;
}

void apply_gradient(MatrixLayer& layer, const std::vector<double>& gradient, double lambda) {
    if (gradient.size() != layer.w.size()) {
        throw ContractError("gradient size does not match the layer");
    }
    if (!(std::isfinite(lambda) && lambda > 0.0)) {
        throw ContractError("lambda must be positive and finite");
    }
    for (std::size_t i = 0; i < layer.w.size(); ++i) {
        layer.w[i] -= lambda * gradient[i];
    }
    if (!std::isfinite(layer.norm_sq())) {
        throw OverflowError(layer.step_index, layer.stream.layer + 1);
    }
    ++layer.step_index;
}

StepStats mc_step(MatrixLayer& layer, double lambda, const std::optional<ConstrainPolicy>& policy) {
    GradientDraw draw = draw_step_gradient(layer, policy);
    apply_gradient(layer, draw.gradient, lambda);
    return draw.stats;
}

void renormalize(std::vector<MatrixLayer>& layers) {
    if (layers.empty()) return;
    double max_norm_sq = 0.0;
    for (const auto& l : layers) max_norm_sq = std::max(max_norm_sq, l.norm_sq());
    if (!(std::isfinite(max_norm_sq) && max_norm_sq > 0.0)) {
        throw ContractError("renormalize needs a finite, nonzero max norm");
    }
    const double inv = 1.0 / std::sqrt(max_norm_sq);
    for (auto& l : layers) {
        for (double& v : l.w) v *= inv;
    }
}

namespace {

struct TrialResult {
    // stats[row * L + layer], rows in recorded-step order.
    std::vector<StepStats> stats;
    double max_ortho = 0.0;
    std::optional<TrialFailure> failure;
};

std::vector<std::uint64_t> recorded_steps(std::uint64_t steps, std::uint64_t every) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i <= steps; i += every) out.push_back(i);
    if (out.back() != steps) out.push_back(steps);
    return out;
}

TrialResult run_trial(std::size_t trial, const NetworkState& initial, const Schedule& schedule,
                      std::uint64_t steps, const McConfig& config,
                      const std::vector<double>& pure_lambdas,
                      const std::vector<std::uint64_t>& rec_steps) {
    const std::size_t L = initial.depth();
    TrialResult result;
    result.stats.resize(rec_steps.size() * L);

    std::vector<MatrixLayer> layers;
    layers.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        layers.push_back(init_matrix_layer(config.rows, config.cols, initial.layers[l].c,
                                           initial.layers[l].sigma_sq,
                                           StreamId{config.seed, trial, l}));
    }

    std::unique_ptr<Schedule> sched;
    if (pure_lambdas.empty()) sched = schedule.clone();

    std::vector<GradientDraw> draws(L);
    std::size_t rec_at = 0;
    for (std::uint64_t i = 0; i <= steps; ++i) {
        try {
            if (config.renormalize_weights) renormalize(layers);
            for (std::size_t l = 0; l < L; ++l) {
                draws[l] = draw_step_gradient(layers[l], config.constrain);
                result.max_ortho = std::max(result.max_ortho, draws[l].stats.ortho_error);
            }
            if (rec_at < rec_steps.size() && rec_steps[rec_at] == i) {
                for (std::size_t l = 0; l < L; ++l) {
                    result.stats[rec_at * L + l] = draws[l].stats;
                }
                ++rec_at;
            }
            if (i == steps) break;

            double lambda;
            if (!pure_lambdas.empty()) {
                lambda = pure_lambdas[i];
            } else {
                // Feedback schedules see the trial's measured state: the
                // squared norms as sigma_sq and |g| |W| as c.
                NetworkState measured;
                measured.config = initial.config;
                measured.step_index = i;
                measured.layers.resize(L);
                for (std::size_t l = 0; l < L; ++l) {
                    measured.layers[l].sigma_sq = draws[l].stats.wnorm_sq;
                    measured.layers[l].c =
                        std::sqrt(draws[l].stats.gnorm_sq * draws[l].stats.wnorm_sq);
                }
                lambda = sched->lr_at(i, &measured);
            }
            for (std::size_t l = 0; l < L; ++l) {
                apply_gradient(layers[l], draws[l].gradient, lambda);
            }
        } catch (const OverflowError& err) {
            result.failure = TrialFailure{trial, err.step, err.layer};
            break;
        }
    }
    return result;
}

}  // namespace

McResult mc_ensemble(const NetworkState& initial, const Schedule& schedule, std::uint64_t steps,
                     const McConfig& config) {
    validate_network(initial);
    if (config.trials < 1) throw ConfigError("trials must be at least 1");
    if (config.record_every < 1) throw ConfigError("record_every must be at least 1");

    const std::size_t L = initial.depth();
    const std::vector<std::uint64_t> rec_steps = recorded_steps(steps, config.record_every);

    // Pure schedules are evaluated once up front; feedback schedules run
    // per trial off measured values.
    std::vector<double> pure_lambdas;
    if (!schedule.needs_state()) {
        auto sched = schedule.clone();
        pure_lambdas.resize(steps);
        for (std::uint64_t i = 0; i < steps; ++i) {
            pure_lambdas[i] = sched->lr_at(i, nullptr);
            if (!(std::isfinite(pure_lambdas[i]) && pure_lambdas[i] > 0.0)) {
                throw ConfigError("schedule produced a non-positive lambda at step " +
                                  std::to_string(i));
            }
        }
    }

    std::vector<TrialResult> trials(config.trials);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trials)));
    if (workers == 1) {
        for (std::size_t t = 0; t < config.trials; ++t) {
            trials[t] = run_trial(t, initial, schedule, steps, config, pure_lambdas, rec_steps);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t t = next.fetch_add(1);
                if (t >= config.trials) return;
                trials[t] = run_trial(t, initial, schedule, steps, config, pure_lambdas, rec_steps);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    McResult result;
    result.trials = config.trials;
    for (std::size_t t = 0; t < config.trials; ++t) {
        if (trials[t].failure) {
            result.excluded.push_back(*trials[t].failure);
        } else {
            result.max_ortho_error = std::max(result.max_ortho_error, trials[t].max_ortho);
        }
    }
    const std::size_t included = config.trials - result.excluded.size();

    result.rows.resize(rec_steps.size());
    for (std::size_t r = 0; r < rec_steps.size(); ++r) {
        result.rows[r].step = rec_steps[r];
        result.rows[r].layers.resize(L);
    }
    if (included > 0) {
        const double n = static_cast<double>(included);
        for (std::size_t r = 0; r < rec_steps.size(); ++r) {
            for (std::size_t l = 0; l < L; ++l) {
                double sum_w = 0.0, sum_g = 0.0, sum_e = 0.0;
                for (std::size_t t = 0; t < config.trials; ++t) {
                    if (trials[t].failure) continue;
                    const StepStats& s = trials[t].stats[r * L + l];
                    sum_w += s.wnorm_sq;
                    sum_g += s.gnorm_sq;
                    sum_e += s.elr;
                }
                EnsembleCell& cell = result.rows[r].layers[l];
                cell.mean_wnorm_sq = sum_w / n;
                cell.mean_gnorm_sq = sum_g / n;
                cell.mean_elr = sum_e / n;
                if (included > 1) {
                    double var_w = 0.0, var_g = 0.0, var_e = 0.0;
                    for (std::size_t t = 0; t < config.trials; ++t) {
                        if (trials[t].failure) continue;
                        const StepStats& s = trials[t].stats[r * L + l];
                        var_w += (s.wnorm_sq - cell.mean_wnorm_sq) * (s.wnorm_sq - cell.mean_wnorm_sq);
                        var_g += (s.gnorm_sq - cell.mean_gnorm_sq) * (s.gnorm_sq - cell.mean_gnorm_sq);
                        var_e += (s.elr - cell.mean_elr) * (s.elr - cell.mean_elr);
                    }
                    cell.std_wnorm_sq = std::sqrt(var_w / (n - 1.0));
                    cell.std_gnorm_sq = std::sqrt(var_g / (n - 1.0));
                    cell.std_elr = std::sqrt(var_e / (n - 1.0));
                }
            }
        }
    }

    // Deterministic reference path, recorded at the same steps.
    {
        auto sched = schedule.clone();
        NetworkState state = initial;
        std::size_t rec_at = 0;
        for (std::uint64_t i = 0; i <= steps; ++i) {
            if (rec_at < rec_steps.size() && rec_steps[rec_at] == i) {
                std::vector<double>& row = result.model_wnorm_sq.emplace_back(L);
                for (std::size_t l = 0; l < L; ++l) row[l] = state.layers[l].sigma_sq;
                ++rec_at;
            }
            if (i == steps) break;
            try {
                state = step_network(state, sched->lr_at(i, &state));
            } catch (const OverflowError&) {
                break;
            }
        }
    }

    if (included > 0) {
        for (std::size_t r = 0; r < result.model_wnorm_sq.size(); ++r) {
            for (std::size_t l = 0; l < L; ++l) {
                const double model = result.model_wnorm_sq[r][l];
                const EnsembleCell& cell = result.rows[r].layers[l];
                const double dev = std::fabs(cell.mean_wnorm_sq - model);
                const double rel = dev / model;
                if (rel > result.deviation.max_rel_dev) {
                    result.deviation.max_rel_dev = rel;
                    result.deviation.rel_step = rec_steps[r];
                    result.deviation.rel_layer = l + 1;
                }
                if (included > 1 && cell.std_wnorm_sq > 0.0) {
                    const double z = dev / (cell.std_wnorm_sq / std::sqrt(static_cast<double>(included)));
                    if (z > result.deviation.max_abs_z) {
                        result.deviation.max_abs_z = z;
                        result.deviation.z_step = rec_steps[r];
                        result.deviation.z_layer = l + 1;
                    }
                }
            }
        }
    }
    return result;
}

}  // namespace elrdyn
