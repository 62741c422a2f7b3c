/*
 * elrdyn: layer-wise learning-rate dynamics of normalized networks.
 *
 * C interface of the shared library. All functions are thread-compatible
 * (use one handle from one thread at a time), return a status code, and
 * report results through out-parameters. On any non-OK status the thread's
 * last-error message is updated; fetch it with elrdyn_last_error().
 *
 * Layer indices in this interface are 1-based, matching the CSV column
 * names and report fields the library emits.
 */
#ifndef ELRDYN_H
#define ELRDYN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ELRDYN_API __declspec(dllexport)
#else
#define ELRDYN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum elrdyn_status {
    ELRDYN_OK = 0,
    ELRDYN_ERR_INVALID_ARG = 1, /* null pointer, index out of range, bad value */
    ELRDYN_ERR_CONFIG = 2,      /* malformed config or impossible request */
    ELRDYN_ERR_NUMERIC = 3,     /* overflow; partial results may exist */
    ELRDYN_ERR_IO = 4,          /* filesystem failure */
    ELRDYN_ERR_INTERNAL = 5
} elrdyn_status;

typedef struct elrdyn_network elrdyn_network;
typedef struct elrdyn_schedule elrdyn_schedule;
typedef struct elrdyn_trajectory elrdyn_trajectory;
typedef struct elrdyn_ensemble elrdyn_ensemble;

/* Library version, e.g. "1.0.0". Static storage, never freed. */
ELRDYN_API const char* elrdyn_version(void);

/* Message of the calling thread's most recent failure. Valid until the next
 * failing call on the same thread. Never NULL. */
ELRDYN_API const char* elrdyn_last_error(void);

/* ---- network state ----------------------------------------------------
 * A network is a list of layers, each carrying sigma_sq (expected squared
 * weight norm) and c (gradient coefficient; expected gradient norm is
 * c / sigma). `alpha` <= 0 selects the default sqrt(pi / (pi - 1)); pass
 * initial_sigma_sq <= 0 to get the default 2. */

ELRDYN_API elrdyn_status elrdyn_network_create_feedforward(size_t depth, double alpha,
                                                           double initial_sigma_sq,
                                                           elrdyn_network** out);

ELRDYN_API elrdyn_status elrdyn_network_create_resnet(size_t depth, size_t block_size,
                                                      double alpha, double initial_sigma_sq,
                                                      elrdyn_network** out);

ELRDYN_API elrdyn_status elrdyn_network_create_uniform(size_t depth, double initial_sigma_sq,
                                                       elrdyn_network** out);

/* c has `depth` entries; sigma_sq may be NULL to start every layer at
 * initial_sigma_sq (or 2 when that is <= 0). */
ELRDYN_API elrdyn_status elrdyn_network_create_explicit(const double* c, const double* sigma_sq,
                                                        size_t depth, double initial_sigma_sq,
                                                        elrdyn_network** out);

ELRDYN_API void elrdyn_network_free(elrdyn_network* network);

ELRDYN_API elrdyn_status elrdyn_network_clone(const elrdyn_network* network,
                                              elrdyn_network** out);

/* Tolerance used when ELRs are compared for equality (default 1e-12) and
 * the continuous-model constant k0 (default 4). */
ELRDYN_API elrdyn_status elrdyn_network_set_tolerance(elrdyn_network* network, double tolerance);
ELRDYN_API elrdyn_status elrdyn_network_set_k0(elrdyn_network* network, double k0);

ELRDYN_API size_t elrdyn_network_depth(const elrdyn_network* network);
ELRDYN_API elrdyn_status elrdyn_network_layer(const elrdyn_network* network, size_t layer,
                                              double* sigma_sq, double* c);
ELRDYN_API elrdyn_status elrdyn_network_elr(const elrdyn_network* network, size_t layer,
                                            double* out);
ELRDYN_API elrdyn_status elrdyn_network_step_index(const elrdyn_network* network, uint64_t* out);
ELRDYN_API elrdyn_status elrdyn_network_elapsed_time(const elrdyn_network* network, double* out);

/* One in-place update with the given lambda (> 0). */
ELRDYN_API elrdyn_status elrdyn_network_step(elrdyn_network* network, double lambda);

/* Largest lambda that keeps the ELR ordering of the extreme pair. */
ELRDYN_API elrdyn_status elrdyn_network_critical_lr(const elrdyn_network* network, double* out);

/* Flipping ratio of the two highest distinct ELR classes; needs >= 2 layers. */
ELRDYN_API elrdyn_status elrdyn_network_subcritical_lr(const elrdyn_network* network, double* out);

/* Population std of ln ELR across layers. */
ELRDYN_API elrdyn_status elrdyn_network_s_rel(const elrdyn_network* network, double* out);

/* Closed form of the continuous norm model: sqrt(2 c^2 t + k0). */
ELRDYN_API elrdyn_status elrdyn_continuous_sigma_sq(double c, double t, double k0, double* out);

/* ---- schedules ---------------------------------------------------------
 * Built from the same JSON spec the scenario files use, e.g.
 *   {"kind": "constant", "lr": 0.1}
 *   {"kind": "subcritical_warmup", "safety_factor": 0.9}
 * Kinds: constant, multistep, cosine, linear_warmup, one_cycle,
 * subcritical_warmup, composite. */

ELRDYN_API elrdyn_status elrdyn_schedule_create_json(const char* json_spec,
                                                     elrdyn_schedule** out);

ELRDYN_API void elrdyn_schedule_free(elrdyn_schedule* schedule);

/* 1 if the schedule reads the network state (subcritical warm-up). */
ELRDYN_API int elrdyn_schedule_needs_state(const elrdyn_schedule* schedule);

/* Lambda at `step`. `network` may be NULL for pure schedules. Subcritical
 * warm-up remembers its held lambda, so query it in step order. */
ELRDYN_API elrdyn_status elrdyn_schedule_lr_at(elrdyn_schedule* schedule, uint64_t step,
                                               const elrdyn_network* network, double* out);

/* ---- deterministic simulation ------------------------------------------ */

/* Runs `steps` updates, recording every record_every-th step plus the final
 * state. The schedule handle itself is not consumed (an internal clone
 * advances). Overflow still yields a trajectory (ELRDYN_OK); check
 * elrdyn_trajectory_failure. convergence_ratio_tolerance <= 0 selects the
 * default 1e-9. */
ELRDYN_API elrdyn_status elrdyn_simulate(const elrdyn_network* network,
                                         const elrdyn_schedule* schedule, uint64_t steps,
                                         uint64_t record_every,
                                         double convergence_ratio_tolerance,
                                         elrdyn_trajectory** out);

ELRDYN_API void elrdyn_trajectory_free(elrdyn_trajectory* trajectory);

ELRDYN_API size_t elrdyn_trajectory_rows(const elrdyn_trajectory* trajectory);
ELRDYN_API size_t elrdyn_trajectory_layers(const elrdyn_trajectory* trajectory);

/* Scalar columns of one recorded row. Any out-pointer may be NULL. */
ELRDYN_API elrdyn_status elrdyn_trajectory_row(const elrdyn_trajectory* trajectory, size_t row,
                                               uint64_t* step, double* lambda, double* kappa_crit,
                                               double* kappa_sub, double* s_rel, uint32_t* flips);

/* Per-layer columns of one recorded row. Any out-pointer may be NULL. */
ELRDYN_API elrdyn_status elrdyn_trajectory_layer(const elrdyn_trajectory* trajectory, size_t row,
                                                 size_t layer, double* sigma_sq, double* grad_norm,
                                                 double* elr);

/* Flip events are always recorded at full resolution. */
ELRDYN_API size_t elrdyn_trajectory_flip_count(const elrdyn_trajectory* trajectory);
ELRDYN_API elrdyn_status elrdyn_trajectory_flip(const elrdyn_trajectory* trajectory, size_t index,
                                                uint64_t* step, size_t* high_layer,
                                                size_t* low_layer, double* lambda, double* kappa);

/* First step at which max pairwise |ln ELR ratio| <= ln(1 + tolerance);
 * returns 1 and fills *step when reached, 0 otherwise. */
ELRDYN_API int elrdyn_trajectory_converged_at(const elrdyn_trajectory* trajectory, uint64_t* step);

/* Returns 1 and fills the failing step/layer if the run overflowed. */
ELRDYN_API int elrdyn_trajectory_failure(const elrdyn_trajectory* trajectory, uint64_t* step,
                                         size_t* layer);

ELRDYN_API elrdyn_status elrdyn_trajectory_write_csv(const elrdyn_trajectory* trajectory,
                                                     const char* path);

/* ---- random-matrix ensemble --------------------------------------------- */

typedef struct elrdyn_mc_options {
    size_t rows;            /* 0 -> 64 */
    size_t cols;            /* 0 -> 64 */
    size_t trials;          /* 0 -> 1 */
    uint64_t seed;
    uint64_t record_every;  /* 0 -> 1 */
    int renormalize_weights;
    int constrain;          /* nonzero: apply e_goal/epsilon below */
    double e_goal;
    double epsilon;         /* <= 0 -> 1e-5 */
    unsigned threads;       /* 0 -> 1; outputs identical for any value */
} elrdyn_mc_options;

ELRDYN_API elrdyn_status elrdyn_mc_run(const elrdyn_network* network,
                                       const elrdyn_schedule* schedule, uint64_t steps,
                                       const elrdyn_mc_options* options, elrdyn_ensemble** out);

ELRDYN_API void elrdyn_ensemble_free(elrdyn_ensemble* ensemble);

ELRDYN_API size_t elrdyn_ensemble_rows(const elrdyn_ensemble* ensemble);
ELRDYN_API size_t elrdyn_ensemble_layers(const elrdyn_ensemble* ensemble);

/* Cross-trial statistics of one (recorded step, layer) cell; stds use the
 * sample convention. Any out-pointer may be NULL. */
ELRDYN_API elrdyn_status elrdyn_ensemble_cell(const elrdyn_ensemble* ensemble, size_t row,
                                              size_t layer, uint64_t* step, double* mean_wnorm_sq,
                                              double* std_wnorm_sq, double* mean_gnorm_sq,
                                              double* std_gnorm_sq, double* mean_elr,
                                              double* std_elr);

/* Expectation-model reference for the same cell. */
ELRDYN_API elrdyn_status elrdyn_ensemble_model_wnorm_sq(const elrdyn_ensemble* ensemble,
                                                        size_t row, size_t layer, double* out);

ELRDYN_API size_t elrdyn_ensemble_excluded_trials(const elrdyn_ensemble* ensemble);
ELRDYN_API elrdyn_status elrdyn_ensemble_excluded(const elrdyn_ensemble* ensemble, size_t index,
                                                  size_t* trial, uint64_t* step, size_t* layer);

/* Largest |<g, W>| / (|g| |W|) seen across every included draw. */
ELRDYN_API elrdyn_status elrdyn_ensemble_max_ortho_error(const elrdyn_ensemble* ensemble,
                                                         double* out);

/* Largest |mean - model| / model over squared weight norms, with location. */
ELRDYN_API elrdyn_status elrdyn_ensemble_max_rel_dev(const elrdyn_ensemble* ensemble, double* out,
                                                     uint64_t* step, size_t* layer);

ELRDYN_API elrdyn_status elrdyn_ensemble_write_csv(const elrdyn_ensemble* ensemble,
                                                   const char* path);

/* ---- scenario runners ----------------------------------------------------
 * File-level entry points behind the `elrdyn` CLI: load a scenario config,
 * run it, write the outputs into out_dir. They print progress to stdout
 * unless quiet is set and report errors on stderr. The returned status maps
 * onto the CLI exit codes: OK = 0, CONFIG/INVALID_ARG = 1, NUMERIC = 2
 * (partial outputs written), IO = 3. */

typedef struct elrdyn_run_options {
    const char* out_dir;      /* NULL -> "." */
    int has_seed;
    uint64_t seed;            /* replaces mc.seed when has_seed */
    int has_record_every;
    uint64_t record_every;    /* replaces config.record_every */
    int quiet;
    unsigned threads;         /* 0 -> 1 */
} elrdyn_run_options;

ELRDYN_API elrdyn_status elrdyn_run_simulate(const char* config_path,
                                             const elrdyn_run_options* options);
ELRDYN_API elrdyn_status elrdyn_run_compare(const char* config_path,
                                            const elrdyn_run_options* options);
ELRDYN_API elrdyn_status elrdyn_run_mc(const char* config_path,
                                       const elrdyn_run_options* options);

#ifdef __cplusplus
}
#endif

#endif /* ELRDYN_H */
