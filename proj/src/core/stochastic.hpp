#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/schedule.hpp"

namespace elrdyn {

// Rescales every drawn gradient so the measured ELR lands on e_goal:
// g *= e_goal / (measured + epsilon).
struct ConstrainPolicy {
    double e_goal = 1.0;
    double epsilon = 1e-5;
};

// A concrete weight matrix standing in for one layer of the expectation
// model. Draws come from the layer's own counter-based stream, addressed by
// step, so trials and layers never share randomness.
struct MatrixLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double c = 1.0;
    StreamId stream;
    std::uint64_t step_index = 0;
    std::vector<double> w;  // row-major

    std::size_t size() const { return rows * cols; }
    double norm_sq() const;
};

// Entries i.i.d. normal with variance initial_sigma_sq / (rows * cols), so
// the expected squared Frobenius norm is initial_sigma_sq.
MatrixLayer init_matrix_layer(std::size_t rows, std::size_t cols, double c,
                              double initial_sigma_sq, const StreamId& stream);

// Measured quantities of one prospective step, after any policy rescale.
struct StepStats {
    double wnorm_sq = 0.0;
    double gnorm_sq = 0.0;
    double elr = 0.0;          // |g|_F / |W|_F
    double ortho_error = 0.0;  // |<g, W>| / (|g|_F |W|_F); 0 for g = 0
};

struct GradientDraw {
    std::vector<double> gradient;
    StepStats stats;
};

// The random-walk gradient for the layer's current step: i.i.d. normal
// entries with per-entry std (c / |W|_F) / sqrt(rows * cols), then the
// component along W projected out, then the policy rescale if given.
// Pure: drawing twice without applying yields identical values.
GradientDraw draw_step_gradient(const MatrixLayer& layer,
                                const std::optional<ConstrainPolicy>& policy);

// w -= lambda * gradient; advances step_index. Throws OverflowError (step =
// the index just applied, layer = stream.layer + 1) on non-finite results.
void apply_gradient(MatrixLayer& layer, const std::vector<double>& gradient, double lambda);

// draw_step_gradient + apply_gradient in one call.
StepStats mc_step(MatrixLayer& layer, double lambda, const std::optional<ConstrainPolicy>& policy);

// Divides every matrix by the max Frobenius norm over the layers, making
// that max exactly 1. Applying it twice equals applying it once.
void renormalize(std::vector<MatrixLayer>& layers);

struct McConfig {
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::optional<ConstrainPolicy> constrain;
    bool renormalize_weights = false;
    std::uint64_t record_every = 1;
    unsigned threads = 1;  // outputs are identical for any value
};

// Cross-trial statistics for one layer at one recorded step. Stds use the
// sample convention (n - 1) since their job is standard-error estimation.
struct EnsembleCell {
    double mean_wnorm_sq = 0.0;
    double std_wnorm_sq = 0.0;
    double mean_gnorm_sq = 0.0;
    double std_gnorm_sq = 0.0;
    double mean_elr = 0.0;
    double std_elr = 0.0;
};

struct EnsembleRow {
    std::uint64_t step = 0;
    std::vector<EnsembleCell> layers;
};

// A trial whose update overflowed; it is dropped from every statistic.
struct TrialFailure {
    std::size_t trial = 0;  // 0-based trial index
    std::uint64_t step = 0;
    std::size_t layer = 0;  // 1-based
};

struct ModelDeviation {
    double max_rel_dev = 0.0;  // |mean - model| / model over wnorm_sq cells
    std::uint64_t rel_step = 0;
    std::size_t rel_layer = 1;
    double max_abs_z = 0.0;  // |mean - model| / (std / sqrt(n))
    std::uint64_t z_step = 0;
    std::size_t z_layer = 1;
};

struct McResult {
    std::vector<EnsembleRow> rows;
    std::size_t trials = 0;
    std::vector<TrialFailure> excluded;
    double max_ortho_error = 0.0;
    // Deterministic expectation-model reference, same recorded steps;
    // truncated early if the reference itself overflows.
    std::vector<std::vector<double>> model_wnorm_sq;
    ModelDeviation deviation;
};

// Runs `trials` independent random-walk trials of the network for `steps`
// updates each and aggregates per-step, per-layer statistics. Every row also
// carries the measured gradient stats of a draw at that step; the final
// row's draw is measured but never applied. Fully deterministic in
// (initial, schedule, steps, config), including the thread count.
McResult mc_ensemble(const NetworkState& initial, const Schedule& schedule, std::uint64_t steps,
                     const McConfig& config);

}  // namespace elrdyn
