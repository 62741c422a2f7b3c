#include "elrdyn/elrdyn.h"

#include <exception>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "core/format.hpp"
#include "core/metrics.hpp"
#include "core/profiles.hpp"
#include "core/runner.hpp"
#include "core/scenario.hpp"
#include "core/simulate.hpp"
#include "core/stochastic.hpp"

struct elrdyn_network {
    elrdyn::NetworkState state;
};

struct elrdyn_schedule {
    std::unique_ptr<elrdyn::Schedule> schedule;
};

struct elrdyn_trajectory {
    elrdyn::SimResult result;
};

struct elrdyn_ensemble {
    elrdyn::McResult result;
};

namespace {

thread_local std::string g_last_error = "no error";

elrdyn_status set_error(elrdyn_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs `body` and folds every exception into a status code.
template <typename Fn>
elrdyn_status guarded(Fn&& body) {
    try {
        return body();
    } catch (const elrdyn::ConfigError& e) {
        return set_error(ELRDYN_ERR_CONFIG, e.what());
    } catch (const elrdyn::ContractError& e) {
        return set_error(ELRDYN_ERR_INVALID_ARG, e.what());
    } catch (const elrdyn::OverflowError& e) {
        return set_error(ELRDYN_ERR_NUMERIC, e.what());
    } catch (const elrdyn::IoError& e) {
        return set_error(ELRDYN_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(ELRDYN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(ELRDYN_ERR_INTERNAL, e.what());
    }
}

elrdyn_status require(bool ok, const char* message) {
    return ok ? ELRDYN_OK : set_error(ELRDYN_ERR_INVALID_ARG, message);
}

elrdyn_status make_network_handle(elrdyn::ProfileSpec spec, elrdyn_network** out) {
    return guarded([&]() {
        auto handle = std::make_unique<elrdyn_network>();
        handle->state = elrdyn::make_network(spec);
        *out = handle.release();
        return ELRDYN_OK;
    });
}

void assign(double* dst, double value) {
    if (dst) *dst = value;
}

elrdyn::RunOptions convert(const elrdyn_run_options* options) {
    elrdyn::RunOptions run;
    if (!options) return run;
    if (options->out_dir) run.out_dir = options->out_dir;
    if (options->has_seed) run.seed = options->seed;
    if (options->has_record_every) run.record_every = options->record_every;
    run.quiet = options->quiet != 0;
    run.threads = options->threads == 0 ? 1 : options->threads;
    return run;
}

elrdyn_status from_exit_code(int code) {
    switch (code) {
        case elrdyn::kExitOk:
            return ELRDYN_OK;
        case elrdyn::kExitConfig:
            return set_error(ELRDYN_ERR_CONFIG, "configuration error (see stderr)");
        case elrdyn::kExitNumeric:
            return set_error(ELRDYN_ERR_NUMERIC, "numerical overflow; partial outputs written");
        case elrdyn::kExitIo:
            return set_error(ELRDYN_ERR_IO, "I/O error (see stderr)");
        default:
            return set_error(ELRDYN_ERR_INTERNAL, "unexpected exit code");
    }
}

}  // namespace

extern "C" {

const char* elrdyn_version(void) { return "1.0.0"; }

const char* elrdyn_last_error(void) { return g_last_error.c_str(); }

elrdyn_status elrdyn_network_create_feedforward(size_t depth, double alpha,
                                                double initial_sigma_sq, elrdyn_network** out) {
    if (require(out != nullptr, "out must not be null")) return ELRDYN_ERR_INVALID_ARG;
    elrdyn::ProfileSpec spec;
    spec.kind = elrdyn::ProfileKind::feedforward;
    spec.depth = depth;
    if (alpha > 0) spec.alpha = alpha;
    if (initial_sigma_sq > 0) spec.initial_sigma_sq = initial_sigma_sq;
    return make_network_handle(std::move(spec), out);
}

elrdyn_status elrdyn_network_create_resnet(size_t depth, size_t block_size, double alpha,
                                           double initial_sigma_sq, elrdyn_network** out) {
    if (require(out != nullptr, "out must not be null")) return ELRDYN_ERR_INVALID_ARG;
    elrdyn::ProfileSpec spec;
    spec.kind = elrdyn::ProfileKind::resnet;
    spec.depth = depth;
    spec.block_size = block_size;
    if (alpha > 0) spec.alpha = alpha;
    if (initial_sigma_sq > 0) spec.initial_sigma_sq = initial_sigma_sq;
    return make_network_handle(std::move(spec), out);
}

elrdyn_status elrdyn_network_create_uniform(size_t depth, double initial_sigma_sq,
                                            elrdyn_network** out) {
    if (require(out != nullptr, "out must not be null")) return ELRDYN_ERR_INVALID_ARG;
    elrdyn::ProfileSpec spec;
    spec.kind = elrdyn::ProfileKind::uniform;
    spec.depth = depth;
    if (initial_sigma_sq > 0) spec.initial_sigma_sq = initial_sigma_sq;
    return make_network_handle(std::move(spec), out);
}

elrdyn_status elrdyn_network_create_explicit(const double* c, const double* sigma_sq,
                                             size_t depth, double initial_sigma_sq,
                                             elrdyn_network** out) {
    if (require(out != nullptr && c != nullptr, "c and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    elrdyn::ProfileSpec spec;
    spec.kind = elrdyn::ProfileKind::explicit_values;
    spec.depth = depth;
    spec.c.assign(c, c + depth);
    if (sigma_sq) spec.sigma_sq.assign(sigma_sq, sigma_sq + depth);
    if (initial_sigma_sq > 0) spec.initial_sigma_sq = initial_sigma_sq;
    return make_network_handle(std::move(spec), out);
}

void elrdyn_network_free(elrdyn_network* network) { delete network; }

elrdyn_status elrdyn_network_clone(const elrdyn_network* network, elrdyn_network** out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        *out = new elrdyn_network{network->state};
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_network_set_tolerance(elrdyn_network* network, double tolerance) {
    if (require(network != nullptr, "network must not be null")) return ELRDYN_ERR_INVALID_ARG;
    if (require(tolerance > 0, "tolerance must be positive")) return ELRDYN_ERR_INVALID_ARG;
    network->state.config.numeric_tolerance = tolerance;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_network_set_k0(elrdyn_network* network, double k0) {
    if (require(network != nullptr, "network must not be null")) return ELRDYN_ERR_INVALID_ARG;
    if (require(k0 > 0, "k0 must be positive")) return ELRDYN_ERR_INVALID_ARG;
    network->state.config.k0 = k0;
    return ELRDYN_OK;
}

size_t elrdyn_network_depth(const elrdyn_network* network) {
    return network ? network->state.depth() : 0;
}

elrdyn_status elrdyn_network_layer(const elrdyn_network* network, size_t layer, double* sigma_sq,
                                   double* c) {
    if (require(network != nullptr, "network must not be null")) return ELRDYN_ERR_INVALID_ARG;
    if (require(layer >= 1 && layer <= network->state.depth(), "layer index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    assign(sigma_sq, network->state.layers[layer - 1].sigma_sq);
    assign(c, network->state.layers[layer - 1].c);
    return ELRDYN_OK;
}

elrdyn_status elrdyn_network_elr(const elrdyn_network* network, size_t layer, double* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    if (require(layer >= 1 && layer <= network->state.depth(), "layer index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = elrdyn::elr(network->state.layers[layer - 1]);
    return ELRDYN_OK;
}

elrdyn_status elrdyn_network_step_index(const elrdyn_network* network, uint64_t* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = network->state.step_index;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_network_elapsed_time(const elrdyn_network* network, double* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = network->state.elapsed_time;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_network_step(elrdyn_network* network, double lambda) {
    if (require(network != nullptr, "network must not be null")) return ELRDYN_ERR_INVALID_ARG;
    return guarded([&]() {
        network->state = elrdyn::step_network(network->state, lambda);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_network_critical_lr(const elrdyn_network* network, double* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        *out = elrdyn::critical_lr(network->state);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_network_subcritical_lr(const elrdyn_network* network, double* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        *out = elrdyn::subcritical_lr(network->state);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_network_s_rel(const elrdyn_network* network, double* out) {
    if (require(network != nullptr && out != nullptr, "network and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        *out = elrdyn::spread_report(network->state).s_rel;
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_continuous_sigma_sq(double c, double t, double k0, double* out) {
    if (require(out != nullptr, "out must not be null")) return ELRDYN_ERR_INVALID_ARG;
    return guarded([&]() {
        elrdyn::ModelConfig config;
        if (k0 > 0) config.k0 = k0;
        *out = elrdyn::continuous_sigma_sq(c, t, config);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_schedule_create_json(const char* json_spec, elrdyn_schedule** out) {
    if (require(json_spec != nullptr && out != nullptr, "json_spec and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(json_spec);
        } catch (const nlohmann::json::parse_error& e) {
            throw elrdyn::ConfigError(std::string("schedule spec: ") + e.what());
        }
        auto handle = std::make_unique<elrdyn_schedule>();
        handle->schedule = elrdyn::schedule_from_json(parsed);
        *out = handle.release();
        return ELRDYN_OK;
    });
}

void elrdyn_schedule_free(elrdyn_schedule* schedule) { delete schedule; }

int elrdyn_schedule_needs_state(const elrdyn_schedule* schedule) {
    return schedule && schedule->schedule->needs_state() ? 1 : 0;
}

elrdyn_status elrdyn_schedule_lr_at(elrdyn_schedule* schedule, uint64_t step,
                                    const elrdyn_network* network, double* out) {
    if (require(schedule != nullptr && out != nullptr, "schedule and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        *out = schedule->schedule->lr_at(step, network ? &network->state : nullptr);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_simulate(const elrdyn_network* network, const elrdyn_schedule* schedule,
                              uint64_t steps, uint64_t record_every,
                              double convergence_ratio_tolerance, elrdyn_trajectory** out) {
    if (require(network != nullptr && schedule != nullptr && out != nullptr,
                "network, schedule and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        elrdyn::SimulateOptions options;
        options.record_every = record_every == 0 ? 1 : record_every;
        if (convergence_ratio_tolerance > 0) {
            options.convergence_ratio_tolerance = convergence_ratio_tolerance;
        }
        auto handle = std::make_unique<elrdyn_trajectory>();
        handle->result = elrdyn::simulate(network->state, *schedule->schedule, steps, options);
        *out = handle.release();
        return ELRDYN_OK;
    });
}

void elrdyn_trajectory_free(elrdyn_trajectory* trajectory) { delete trajectory; }

size_t elrdyn_trajectory_rows(const elrdyn_trajectory* trajectory) {
    return trajectory ? trajectory->result.trajectory.rows.size() : 0;
}

size_t elrdyn_trajectory_layers(const elrdyn_trajectory* trajectory) {
    return trajectory ? trajectory->result.trajectory.num_layers : 0;
}

elrdyn_status elrdyn_trajectory_row(const elrdyn_trajectory* trajectory, size_t row,
                                    uint64_t* step, double* lambda, double* kappa_crit,
                                    double* kappa_sub, double* s_rel, uint32_t* flips) {
    if (require(trajectory != nullptr, "trajectory must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    if (require(row < trajectory->result.trajectory.rows.size(), "row out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& r = trajectory->result.trajectory.rows[row];
    if (step) *step = r.step;
    assign(lambda, r.lambda);
    assign(kappa_crit, r.kappa_crit);
    assign(kappa_sub, r.kappa_sub);
    assign(s_rel, r.s_rel);
    if (flips) *flips = r.flips;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_trajectory_layer(const elrdyn_trajectory* trajectory, size_t row,
                                      size_t layer, double* sigma_sq, double* grad_norm,
                                      double* elr) {
    if (require(trajectory != nullptr, "trajectory must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& t = trajectory->result.trajectory;
    if (require(row < t.rows.size(), "row out of range")) return ELRDYN_ERR_INVALID_ARG;
    if (require(layer >= 1 && layer <= t.num_layers, "layer index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& r = t.rows[row];
    assign(sigma_sq, r.sigma_sq[layer - 1]);
    assign(grad_norm, r.grad_norm[layer - 1]);
    assign(elr, r.elr[layer - 1]);
    return ELRDYN_OK;
}

size_t elrdyn_trajectory_flip_count(const elrdyn_trajectory* trajectory) {
    return trajectory ? trajectory->result.trajectory.flips.size() : 0;
}

elrdyn_status elrdyn_trajectory_flip(const elrdyn_trajectory* trajectory, size_t index,
                                     uint64_t* step, size_t* high_layer, size_t* low_layer,
                                     double* lambda, double* kappa) {
    if (require(trajectory != nullptr, "trajectory must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    if (require(index < trajectory->result.trajectory.flips.size(), "flip index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& f = trajectory->result.trajectory.flips[index];
    if (step) *step = f.step;
    if (high_layer) *high_layer = f.high_layer;
    if (low_layer) *low_layer = f.low_layer;
    assign(lambda, f.lambda);
    assign(kappa, f.kappa);
    return ELRDYN_OK;
}

int elrdyn_trajectory_converged_at(const elrdyn_trajectory* trajectory, uint64_t* step) {
    if (!trajectory || !trajectory->result.converged_at) return 0;
    if (step) *step = *trajectory->result.converged_at;
    return 1;
}

int elrdyn_trajectory_failure(const elrdyn_trajectory* trajectory, uint64_t* step, size_t* layer) {
    if (!trajectory || !trajectory->result.failure) return 0;
    if (step) *step = trajectory->result.failure->step;
    if (layer) *layer = trajectory->result.failure->layer;
    return 1;
}

elrdyn_status elrdyn_trajectory_write_csv(const elrdyn_trajectory* trajectory, const char* path) {
    if (require(trajectory != nullptr && path != nullptr, "trajectory and path must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw elrdyn::IoError(std::string("cannot open ") + path + " for writing");
        elrdyn::write_trajectory_csv(trajectory->result.trajectory, out);
        out.flush();
        if (!out) throw elrdyn::IoError(std::string("failed while writing ") + path);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_mc_run(const elrdyn_network* network, const elrdyn_schedule* schedule,
                            uint64_t steps, const elrdyn_mc_options* options,
                            elrdyn_ensemble** out) {
    if (require(network != nullptr && schedule != nullptr && out != nullptr,
                "network, schedule and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        elrdyn::McConfig config;
        if (options) {
            config.rows = options->rows == 0 ? 64 : options->rows;
            config.cols = options->cols == 0 ? 64 : options->cols;
            config.trials = options->trials == 0 ? 1 : options->trials;
            config.seed = options->seed;
            config.record_every = options->record_every == 0 ? 1 : options->record_every;
            config.renormalize_weights = options->renormalize_weights != 0;
            if (options->constrain) {
                elrdyn::ConstrainPolicy policy;
                policy.e_goal = options->e_goal;
                policy.epsilon = options->epsilon > 0 ? options->epsilon : 1e-5;
                config.constrain = policy;
            }
            config.threads = options->threads == 0 ? 1 : options->threads;
        }
        auto handle = std::make_unique<elrdyn_ensemble>();
        handle->result = elrdyn::mc_ensemble(network->state, *schedule->schedule, steps, config);
        *out = handle.release();
        return ELRDYN_OK;
    });
}

void elrdyn_ensemble_free(elrdyn_ensemble* ensemble) { delete ensemble; }

size_t elrdyn_ensemble_rows(const elrdyn_ensemble* ensemble) {
    return ensemble ? ensemble->result.rows.size() : 0;
}

size_t elrdyn_ensemble_layers(const elrdyn_ensemble* ensemble) {
    if (!ensemble || ensemble->result.rows.empty()) return 0;
    return ensemble->result.rows.front().layers.size();
}

elrdyn_status elrdyn_ensemble_cell(const elrdyn_ensemble* ensemble, size_t row, size_t layer,
                                   uint64_t* step, double* mean_wnorm_sq, double* std_wnorm_sq,
                                   double* mean_gnorm_sq, double* std_gnorm_sq, double* mean_elr,
                                   double* std_elr) {
    if (require(ensemble != nullptr, "ensemble must not be null")) return ELRDYN_ERR_INVALID_ARG;
    if (require(row < ensemble->result.rows.size(), "row out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& r = ensemble->result.rows[row];
    if (require(layer >= 1 && layer <= r.layers.size(), "layer index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& cell = r.layers[layer - 1];
    if (step) *step = r.step;
    assign(mean_wnorm_sq, cell.mean_wnorm_sq);
    assign(std_wnorm_sq, cell.std_wnorm_sq);
    assign(mean_gnorm_sq, cell.mean_gnorm_sq);
    assign(std_gnorm_sq, cell.std_gnorm_sq);
    assign(mean_elr, cell.mean_elr);
    assign(std_elr, cell.std_elr);
    return ELRDYN_OK;
}

elrdyn_status elrdyn_ensemble_model_wnorm_sq(const elrdyn_ensemble* ensemble, size_t row,
                                             size_t layer, double* out) {
    if (require(ensemble != nullptr && out != nullptr, "ensemble and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    if (require(row < ensemble->result.model_wnorm_sq.size(), "row out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& r = ensemble->result.model_wnorm_sq[row];
    if (require(layer >= 1 && layer <= r.size(), "layer index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = r[layer - 1];
    return ELRDYN_OK;
}

size_t elrdyn_ensemble_excluded_trials(const elrdyn_ensemble* ensemble) {
    return ensemble ? ensemble->result.excluded.size() : 0;
}

elrdyn_status elrdyn_ensemble_excluded(const elrdyn_ensemble* ensemble, size_t index,
                                       size_t* trial, uint64_t* step, size_t* layer) {
    if (require(ensemble != nullptr, "ensemble must not be null")) return ELRDYN_ERR_INVALID_ARG;
    if (require(index < ensemble->result.excluded.size(), "index out of range")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    const auto& f = ensemble->result.excluded[index];
    if (trial) *trial = f.trial;
    if (step) *step = f.step;
    if (layer) *layer = f.layer;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_ensemble_max_ortho_error(const elrdyn_ensemble* ensemble, double* out) {
    if (require(ensemble != nullptr && out != nullptr, "ensemble and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = ensemble->result.max_ortho_error;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_ensemble_max_rel_dev(const elrdyn_ensemble* ensemble, double* out,
                                          uint64_t* step, size_t* layer) {
    if (require(ensemble != nullptr && out != nullptr, "ensemble and out must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    *out = ensemble->result.deviation.max_rel_dev;
    if (step) *step = ensemble->result.deviation.rel_step;
    if (layer) *layer = ensemble->result.deviation.rel_layer;
    return ELRDYN_OK;
}

elrdyn_status elrdyn_ensemble_write_csv(const elrdyn_ensemble* ensemble, const char* path) {
    if (require(ensemble != nullptr && path != nullptr, "ensemble and path must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return guarded([&]() {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw elrdyn::IoError(std::string("cannot open ") + path + " for writing");
        elrdyn::write_ensemble_csv(ensemble->result, out);
        out.flush();
        if (!out) throw elrdyn::IoError(std::string("failed while writing ") + path);
        return ELRDYN_OK;
    });
}

elrdyn_status elrdyn_run_simulate(const char* config_path, const elrdyn_run_options* options) {
    if (require(config_path != nullptr, "config_path must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return from_exit_code(elrdyn::run_simulate(config_path, convert(options)));
}

elrdyn_status elrdyn_run_compare(const char* config_path, const elrdyn_run_options* options) {
    if (require(config_path != nullptr, "config_path must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return from_exit_code(elrdyn::run_compare(config_path, convert(options)));
}

elrdyn_status elrdyn_run_mc(const char* config_path, const elrdyn_run_options* options) {
    if (require(config_path != nullptr, "config_path must not be null")) {
        return ELRDYN_ERR_INVALID_ARG;
    }
    return from_exit_code(elrdyn::run_mc(config_path, convert(options)));
}

}  // extern "C"
