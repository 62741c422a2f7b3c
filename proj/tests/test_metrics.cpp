#include <doctest.h>

#include <cmath>

#include "core/metrics.hpp"
#include "core/profiles.hpp"
#include "core/simulate.hpp"

using namespace elrdyn;

namespace {

// Builds a two-layer trajectory from a list of ELR pairs.
Trajectory traj(const std::vector<std::pair<double, double>>& elrs) {
    Trajectory t;
    t.num_layers = 2;
    for (std::size_t i = 0; i < elrs.size(); ++i) {
        TrajectoryRow row;
        row.step = i;
        row.elr = {elrs[i].first, elrs[i].second};
        row.sigma_sq = {1.0, 1.0};
        row.grad_norm = {1.0, 1.0};
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace

TEST_CASE("s_rel hand-computed values") {
    CHECK(s_rel({1.0, std::exp(1.0)}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s_rel({std::exp(-1.0), std::exp(1.0)}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s_rel({3.0, 3.0, 3.0}) == 0.0);
    CHECK(s_rel({0.7}) == 0.0);
}

TEST_CASE("s_rel is scale invariant") {
    const std::vector<double> base = {0.5, 1.0, 4.0, 9.0};
    std::vector<double> scaled;
    for (double v : base) scaled.push_back(1e6 * v);
    CHECK(s_rel(scaled) == doctest::Approx(s_rel(base)).epsilon(1e-12));
}

TEST_CASE("s_rel rejects empty and non-positive input") {
    CHECK_THROWS_AS(s_rel({}), ContractError);
    CHECK_THROWS_AS(s_rel({1.0, 0.0}), ContractError);
    CHECK_THROWS_AS(s_rel({1.0, -2.0}), ContractError);
    CHECK_THROWS_AS(s_rel({1.0, INFINITY}), ContractError);
}

TEST_CASE("initial feedforward spread follows the closed form") {
    // ln ELR is linear in the layer index, so the spread is ln(alpha) times
    // the population std of 0..L-1, i.e. ln(alpha) * sqrt((L^2 - 1) / 12).
    for (std::size_t L : {2, 5, 20, 110}) {
        ProfileSpec spec;
        spec.kind = ProfileKind::feedforward;
        spec.depth = L;
        const NetworkState state = make_network(spec);
        const SpreadReport report = spread_report(state);
        const double expected =
            std::log(default_alpha()) * std::sqrt((static_cast<double>(L * L) - 1.0) / 12.0);
        CHECK(report.s_rel == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("spread_report locates the extreme layers") {
    NetworkState state;
    state.layers = {LayerState{1.0, 2.0}, LayerState{1.0, 8.0}, LayerState{1.0, 1.0}};
    const SpreadReport report = spread_report(state);
    CHECK(report.argmax_layer == 2);
    CHECK(report.argmin_layer == 3);
    CHECK(report.max_log_ratio == doctest::Approx(std::log(8.0)).epsilon(1e-14));
}

TEST_CASE("flip_count counts sign changes of the log ratio") {
    // Ratio: >1, <1, >1  ->  two crossings.
    const Trajectory t = traj({{2.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}});
    CHECK(flip_count(t) == 2);
}

TEST_CASE("flip_count ignores excursions inside the tolerance band") {
    // The middle rows sit within 1e-13 of a tie and must not count.
    const Trajectory t = traj({{2.0, 1.0},
                               {1.0, 1.0 + 1e-13},
                               {1.0 + 1e-13, 1.0},
                               {1.0, 2.0}});
    CHECK(flip_count(t) == 1);
    // With a zero band the wiggle counts.
    CHECK(flip_count(t, std::nullopt, 0.0) == 3);
}

TEST_CASE("flip_count tracks a caller-selected pair") {
    Trajectory t;
    t.num_layers = 3;
    TrajectoryRow r0;
    r0.elr = {4.0, 1.0, 2.0};
    TrajectoryRow r1;
    r1.elr = {1.0, 4.0, 2.0};
    t.rows = {r0, r1};
    // Default pair is (argmax, argmin) of the first row: layers 1 and 2.
    CHECK(flip_count(t) == 1);
    // Layers 1 and 3 also swap; layers 2 and 3 swap too.
    CHECK(flip_count(t, std::make_pair<std::size_t, std::size_t>(1, 3)) == 1);
    CHECK(flip_count(t, std::make_pair<std::size_t, std::size_t>(3, 3)) == 0);
    CHECK_THROWS_AS(flip_count(t, std::make_pair<std::size_t, std::size_t>(0, 1)), ContractError);
    CHECK_THROWS_AS(flip_count(t, std::make_pair<std::size_t, std::size_t>(1, 4)), ContractError);
}

TEST_CASE("flip_count of an empty trajectory is zero") {
    Trajectory t;
    t.num_layers = 2;
    CHECK(flip_count(t) == 0);
}

TEST_CASE("flip_count agrees with simulate's flip events for a constant run") {
    ProfileSpec spec;
    spec.kind = ProfileKind::explicit_values;
    spec.depth = 2;
    spec.c = {4.0, 1.0};
    const NetworkState initial = make_network(spec);
    const auto schedule = make_constant(2.0);
    const SimResult result = simulate(initial, *schedule, 5);
    CHECK(flip_count(result.trajectory) == result.trajectory.flips.size());
}
