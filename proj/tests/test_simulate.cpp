#include <doctest.h>

#include <cmath>

#include "core/metrics.hpp"
#include "core/profiles.hpp"
#include "core/simulate.hpp"

using namespace elrdyn;

namespace {

NetworkState ff(std::size_t depth) {
    ProfileSpec spec;
    spec.kind = ProfileKind::feedforward;
    spec.depth = depth;
    return make_network(spec);
}

NetworkState explicit_net(std::vector<double> c, std::vector<double> sigma_sq) {
    ProfileSpec spec;
    spec.kind = ProfileKind::explicit_values;
    spec.depth = c.size();
    spec.c = std::move(c);
    spec.sigma_sq = std::move(sigma_sq);
    return make_network(spec);
}

}  // namespace

TEST_CASE("simulate records one row per step plus the final state") {
    const NetworkState initial = ff(2);
    const auto schedule = make_constant(0.1);
    const SimResult result = simulate(initial, *schedule, 5);

    REQUIRE(result.trajectory.rows.size() == 6);
    CHECK(result.trajectory.num_layers == 2);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(result.trajectory.rows[i].step == i);
        CHECK(result.trajectory.rows[i].lambda == 0.1);
    }
    // Row 0 is the untouched initial state.
    CHECK(result.trajectory.rows[0].sigma_sq[0] == 2.0);
    CHECK(result.trajectory.rows[0].sigma_sq[1] == 2.0);
    // The final row matches the final state.
    const auto& last = result.trajectory.rows.back();
    CHECK(last.sigma_sq[0] == result.final_state.layers[0].sigma_sq);
    CHECK(last.sigma_sq[1] == result.final_state.layers[1].sigma_sq);
    CHECK(result.final_state.step_index == 5);
    CHECK(result.final_state.elapsed_time == doctest::Approx(5 * 0.01).epsilon(1e-12));
    CHECK_FALSE(result.failure.has_value());
}

TEST_CASE("simulate reproduces the per-step recurrence") {
    const NetworkState initial = ff(3);
    const auto schedule = make_constant(0.2);
    const SimResult result = simulate(initial, *schedule, 4);

    NetworkState state = initial;
    for (std::size_t i = 0; i < result.trajectory.rows.size(); ++i) {
        const TrajectoryRow& row = result.trajectory.rows[i];
        for (std::size_t l = 0; l < 3; ++l) {
            CHECK(row.sigma_sq[l] == state.layers[l].sigma_sq);
            CHECK(row.elr[l] == elr(state.layers[l]));
            CHECK(row.grad_norm[l] ==
                  doctest::Approx(state.layers[l].c / std::sqrt(state.layers[l].sigma_sq))
                      .epsilon(1e-15));
        }
        CHECK(row.kappa_crit == critical_lr(state));
        CHECK(row.kappa_sub == subcritical_lr(state));
        CHECK(row.s_rel == doctest::Approx(spread_report(state).s_rel).epsilon(1e-15));
        if (i + 1 < result.trajectory.rows.size()) state = step_network(state, 0.2);
    }
}

TEST_CASE("record_every thins rows but always keeps the final step") {
    const NetworkState initial = ff(2);
    const auto schedule = make_constant(0.1);
    SimulateOptions options;
    options.record_every = 3;
    const SimResult result = simulate(initial, *schedule, 7, options);
    REQUIRE(result.trajectory.rows.size() == 4);
    CHECK(result.trajectory.rows[0].step == 0);
    CHECK(result.trajectory.rows[1].step == 3);
    CHECK(result.trajectory.rows[2].step == 6);
    CHECK(result.trajectory.rows[3].step == 7);
}

TEST_CASE("single-layer runs have no subcritical lambda") {
    const NetworkState initial = ff(1);
    const auto schedule = make_constant(0.1);
    const SimResult result = simulate(initial, *schedule, 2);
    CHECK(std::isnan(result.trajectory.rows[0].kappa_sub));
    // kappa_crit degenerates to the self ratio sigma_sq / c.
    CHECK(result.trajectory.rows[0].kappa_crit == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(result.trajectory.rows[0].s_rel == 0.0);
    CHECK(result.converged_at == 0);
}

TEST_CASE("subcritical warm-up converges in depth-1 steps") {
    const NetworkState initial = ff(5);
    const auto schedule = make_subcritical(1.0, std::nullopt, nullptr);
    const SimResult result = simulate(initial, *schedule, 10);
    REQUIRE(result.converged_at.has_value());
    CHECK(*result.converged_at == 4);
    CHECK(result.trajectory.flips.empty());
    // Spread at the converged step is zero within fp noise.
    CHECK(result.trajectory.rows[4].s_rel < 1e-13);
}

TEST_CASE("flip events carry the pair, lambda and kappa") {
    // ELRs 2 and 0.5: kappa = 1; lambda = 2 flips them at step 0.
    const NetworkState initial = explicit_net({4.0, 1.0}, {2.0, 2.0});
    const auto schedule = make_constant(2.0);
    const SimResult result = simulate(initial, *schedule, 3);

    REQUIRE(result.trajectory.flips.size() == 1);
    const FlipEvent& flip = result.trajectory.flips[0];
    CHECK(flip.step == 0);
    CHECK(flip.high_layer == 1);
    CHECK(flip.low_layer == 2);
    CHECK(flip.lambda == 2.0);
    CHECK(flip.kappa == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(result.trajectory.rows[0].flips == 1);
    CHECK(result.trajectory.rows[1].flips == 0);
}

TEST_CASE("no flip just below the flipping ratio, flip just above") {
    const NetworkState initial = explicit_net({4.0, 1.0}, {2.0, 2.0});
    {
        const auto schedule = make_constant(1.0 - 1e-6);
        CHECK(simulate(initial, *schedule, 1).trajectory.flips.empty());
    }
    {
        const auto schedule = make_constant(1.0 + 1e-6);
        CHECK(simulate(initial, *schedule, 1).trajectory.flips.size() == 1);
    }
}

TEST_CASE("flip window counting with sparse recording") {
    const NetworkState initial = explicit_net({4.0, 1.0}, {2.0, 2.0});
    const auto schedule = make_constant(2.0);
    SimulateOptions options;
    options.record_every = 2;
    const SimResult result = simulate(initial, *schedule, 4, options);
    // The flip at step 0 lands in the row covering steps [0, 2).
    REQUIRE(result.trajectory.rows.size() == 3);
    CHECK(result.trajectory.rows[0].flips == 1);
    CHECK(result.trajectory.rows[1].flips == 0);
    // Full-resolution events are unaffected by thinning.
    REQUIRE(result.trajectory.flips.size() == 1);
    CHECK(result.trajectory.flips[0].step == 0);
}

TEST_CASE("overflow truncates the trajectory and reports the failure") {
    const NetworkState initial = explicit_net({1e155, 1.0}, {2.0, 2.0});
    const auto schedule = make_constant(1.0);
    const SimResult result = simulate(initial, *schedule, 10);

    REQUIRE(result.failure.has_value());
    CHECK(result.failure->layer == 1);
    CHECK(result.failure->step == result.trajectory.rows.back().step);
    CHECK(result.trajectory.rows.size() < 11);
    // Every recorded value stays finite.
    for (const auto& row : result.trajectory.rows) {
        for (double v : row.sigma_sq) CHECK(std::isfinite(v));
    }
    CHECK_FALSE(result.converged_at.has_value());
}

TEST_CASE("stateful schedules can be reused because simulate clones them") {
    const NetworkState initial = ff(4);
    const auto schedule = make_subcritical(1.0, std::nullopt, nullptr);
    const SimResult a = simulate(initial, *schedule, 6);
    const SimResult b = simulate(initial, *schedule, 6);
    REQUIRE(a.trajectory.rows.size() == b.trajectory.rows.size());
    for (std::size_t i = 0; i < a.trajectory.rows.size(); ++i) {
        CHECK(a.trajectory.rows[i].lambda == b.trajectory.rows[i].lambda);
        CHECK(a.trajectory.rows[i].sigma_sq == b.trajectory.rows[i].sigma_sq);
    }
}

TEST_CASE("simulate validates its inputs") {
    const NetworkState initial = ff(2);
    const auto schedule = make_constant(0.1);
    SimulateOptions options;
    options.record_every = 0;
    CHECK_THROWS_AS(simulate(initial, *schedule, 1, options), ConfigError);

    options.record_every = 1;
    options.convergence_ratio_tolerance = 0.0;
    CHECK_THROWS_AS(simulate(initial, *schedule, 1, options), ConfigError);

    NetworkState broken = initial;
    broken.layers[0].c = -1.0;
    CHECK_THROWS_AS(simulate(broken, *schedule, 1), ConfigError);
}

TEST_CASE("convergence_horizon matches the full-resolution scan") {
    const NetworkState initial = ff(5);
    const auto schedule = make_subcritical(1.0, std::nullopt, nullptr);
    CHECK(convergence_horizon(initial, *schedule, 1e-9, 10) == 4);
    // Not reachable in fewer steps.
    CHECK_FALSE(convergence_horizon(initial, *schedule, 1e-9, 3).has_value());

    const auto slow = make_constant(1e-6);
    CHECK_FALSE(convergence_horizon(initial, *slow, 1e-9, 50).has_value());

    // Overflow means no horizon.
    const NetworkState hot = explicit_net({1e155, 1.0}, {2.0, 2.0});
    CHECK_FALSE(convergence_horizon(hot, *make_constant(1.0), 1e-9, 50).has_value());
}

TEST_CASE("a converged network stays converged under any schedule") {
    NetworkState state;
    state.layers = {LayerState{2.0, 1.0}, LayerState{4.0, 2.0}};  // equal ELRs
    const auto schedule = make_constant(0.7);
    const SimResult result = simulate(state, *schedule, 20);
    CHECK(result.converged_at == 0);
    for (const auto& row : result.trajectory.rows) {
        CHECK(row.s_rel < 1e-12);
    }
    CHECK(result.trajectory.flips.empty());
}
