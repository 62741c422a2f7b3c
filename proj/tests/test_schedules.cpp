#include <doctest.h>

#include <cmath>

#include "core/profiles.hpp"
#include "core/schedule.hpp"

using namespace elrdyn;

namespace {

NetworkState ff(std::size_t depth) {
    ProfileSpec spec;
    spec.kind = ProfileKind::feedforward;
    spec.depth = depth;
    return make_network(spec);
}

}  // namespace

TEST_CASE("constant schedule") {
    auto s = make_constant(0.05);
    CHECK(s->lr_at(0, nullptr) == 0.05);
    CHECK(s->lr_at(1000000, nullptr) == 0.05);
    CHECK_FALSE(s->needs_state());

    CHECK_THROWS_AS(make_constant(0.0), ConfigError);
    CHECK_THROWS_AS(make_constant(-1.0), ConfigError);
    CHECK_THROWS_AS(make_constant(INFINITY), ConfigError);
}

TEST_CASE("multistep decays at each milestone") {
    auto s = make_multistep(1.0, 0.5, {3, 7});
    CHECK(s->lr_at(0, nullptr) == 1.0);
    CHECK(s->lr_at(2, nullptr) == 1.0);
    CHECK(s->lr_at(3, nullptr) == 0.5);
    CHECK(s->lr_at(6, nullptr) == 0.5);
    CHECK(s->lr_at(7, nullptr) == 0.25);
    CHECK(s->lr_at(1000, nullptr) == 0.25);

    // A milestone at 0 applies immediately; repeated milestones stack.
    auto immediate = make_multistep(1.0, 0.1, {0, 0});
    CHECK(immediate->lr_at(0, nullptr) == doctest::Approx(0.01).epsilon(1e-15));

    CHECK_THROWS_AS(make_multistep(1.0, 0.5, {7, 3}), ConfigError);
    CHECK_THROWS_AS(make_multistep(1.0, 0.0, {3}), ConfigError);
}

TEST_CASE("cosine anneals from peak to the floor") {
    auto s = make_cosine(0.4, 100, 2000.0);
    CHECK(s->lr_at(0, nullptr) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(s->lr_at(100, nullptr) == doctest::Approx(0.4 / 2000.0).epsilon(1e-12));
    CHECK(s->lr_at(5000, nullptr) == doctest::Approx(0.4 / 2000.0).epsilon(1e-12));
    // Halfway point of the cosine blend is the arithmetic mean.
    CHECK(s->lr_at(50, nullptr) == doctest::Approx(0.5 * (0.4 + 0.4 / 2000.0)).epsilon(1e-12));
    // Monotone non-increasing.
    double prev = s->lr_at(0, nullptr);
    for (std::uint64_t i = 1; i <= 100; ++i) {
        const double v = s->lr_at(i, nullptr);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK_THROWS_AS(make_cosine(0.4, 0, 2000.0), ConfigError);
}

TEST_CASE("linear warmup ramps to the peak and holds it") {
    auto s = make_linear_warmup(0.3, 100, 20.0);
    CHECK(s->lr_at(0, nullptr) == doctest::Approx(0.3 / 20.0).epsilon(1e-15));
    CHECK(s->lr_at(50, nullptr) ==
          doctest::Approx(0.3 / 20.0 + 0.5 * (0.3 - 0.3 / 20.0)).epsilon(1e-12));
    CHECK(s->lr_at(100, nullptr) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s->lr_at(101, nullptr) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS(make_linear_warmup(0.3, 0, 20.0), ConfigError);
}

TEST_CASE("one cycle ramps up then anneals to the floor") {
    OneCycleParams p;
    p.peak_lr = 0.5;
    p.total_steps = 100;
    p.pct_start = 0.1;
    p.div_factor = 20.0;
    p.final_div_factor = 2000.0;
    p.cosine_anneal = false;  // linear makes the checkpoints easy to compute
    auto s = make_one_cycle(p);

    const double start = 0.5 / 20.0;
    const double floor = start / 2000.0;
    CHECK(s->lr_at(0, nullptr) == doctest::Approx(start).epsilon(1e-15));
    CHECK(s->lr_at(5, nullptr) == doctest::Approx(start + 0.5 * (0.5 - start)).epsilon(1e-12));
    CHECK(s->lr_at(10, nullptr) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s->lr_at(55, nullptr) == doctest::Approx(0.5 + 0.5 * (floor - 0.5)).epsilon(1e-12));
    CHECK(s->lr_at(100, nullptr) == doctest::Approx(floor).epsilon(1e-12));
    CHECK(s->lr_at(200, nullptr) == doctest::Approx(floor).epsilon(1e-12));

    SUBCASE("pct_start bounds") {
        p.pct_start = 0.0;
        CHECK_THROWS_AS(make_one_cycle(p), ConfigError);
        p.pct_start = 1.0;
        CHECK_THROWS_AS(make_one_cycle(p), ConfigError);
    }
    SUBCASE("up phase never collapses to zero steps") {
        p.pct_start = 0.001;
        p.total_steps = 10;
        auto tiny = make_one_cycle(p);
        CHECK(tiny->lr_at(0, nullptr) == doctest::Approx(start).epsilon(1e-15));
        CHECK(tiny->lr_at(1, nullptr) == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("subcritical warm-up follows the live state then holds") {
    NetworkState state = ff(3);
    auto s = make_subcritical(1.0, std::nullopt, nullptr);
    CHECK(s->needs_state());

    // Warm-up length defaults to the depth seen on the first call.
    const double l0 = s->lr_at(0, &state);
    CHECK(l0 == doctest::Approx(subcritical_lr(state)).epsilon(1e-15));
    state = step_network(state, l0);

    const double l1 = s->lr_at(1, &state);
    CHECK(l1 == doctest::Approx(subcritical_lr(state)).epsilon(1e-15));
    state = step_network(state, l1);

    const double l2 = s->lr_at(2, &state);
    state = step_network(state, l2);

    // Past warm-up (3 steps for depth 3): hold the last warm-up value, state
    // no longer needed.
    CHECK(s->lr_at(3, nullptr) == l2);
    CHECK(s->lr_at(4000, nullptr) == l2);
}

TEST_CASE("subcritical warm-up scales by the safety factor") {
    NetworkState state = ff(4);
    auto s = make_subcritical(0.5, 2, nullptr);
    CHECK(s->lr_at(0, &state) == doctest::Approx(0.5 * subcritical_lr(state)).epsilon(1e-15));
}

TEST_CASE("subcritical warm-up hands over to the follow-on schedule") {
    NetworkState state = ff(2);
    auto s = make_subcritical(1.0, 2, make_multistep(0.1, 0.5, {1}));
    (void)s->lr_at(0, &state);
    (void)s->lr_at(1, &state);
    // Follow-on sees steps relative to the end of the warm-up.
    CHECK(s->lr_at(2, nullptr) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s->lr_at(3, nullptr) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("subcritical warm-up needs a state during warm-up") {
    auto s = make_subcritical(1.0, 2, nullptr);
    CHECK_THROWS_AS(s->lr_at(0, nullptr), ContractError);

    CHECK_THROWS_AS(make_subcritical(0.0, 2, nullptr), ConfigError);
    CHECK_THROWS_AS(make_subcritical(1.5, 2, nullptr), ConfigError);
    CHECK_THROWS_AS(make_subcritical(1.0, 0, nullptr), ConfigError);
}

TEST_CASE("subcritical clone carries the held lambda") {
    NetworkState state = ff(2);
    auto s = make_subcritical(1.0, 1, nullptr);
    const double warm = s->lr_at(0, &state);
    auto copy = s->clone();
    CHECK(copy->lr_at(5, nullptr) == warm);
}

TEST_CASE("composite runs phases on local step indices") {
    std::vector<SchedulePhase> phases;
    phases.push_back({make_constant(0.1), 3});
    phases.push_back({make_multistep(1.0, 0.5, {1}), std::nullopt});
    auto s = make_composite(std::move(phases));

    CHECK(s->lr_at(0, nullptr) == 0.1);
    CHECK(s->lr_at(2, nullptr) == 0.1);
    // Phase 2 starts counting from 0 at global step 3.
    CHECK(s->lr_at(3, nullptr) == 1.0);
    CHECK(s->lr_at(4, nullptr) == 0.5);
    CHECK(s->lr_at(4000, nullptr) == 0.5);
    CHECK_FALSE(s->needs_state());
}

TEST_CASE("composite validation") {
    {
        std::vector<SchedulePhase> phases;
        CHECK_THROWS_AS(make_composite(std::move(phases)), ConfigError);
    }
    {
        // Only the last phase may omit steps.
        std::vector<SchedulePhase> phases;
        phases.push_back({make_constant(0.1), std::nullopt});
        phases.push_back({make_constant(0.2), std::nullopt});
        CHECK_THROWS_AS(make_composite(std::move(phases)), ConfigError);
    }
    {
        std::vector<SchedulePhase> phases;
        phases.push_back({make_constant(0.1), 0});
        CHECK_THROWS_AS(make_composite(std::move(phases)), ConfigError);
    }
}

TEST_CASE("composite propagates needs_state") {
    std::vector<SchedulePhase> phases;
    phases.push_back({make_subcritical(1.0, 2, nullptr), 2});
    phases.push_back({make_constant(0.1), std::nullopt});
    auto s = make_composite(std::move(phases));
    CHECK(s->needs_state());
}

TEST_CASE("clones are independent") {
    auto s = make_multistep(1.0, 0.5, {2});
    auto copy = s->clone();
    CHECK(copy->lr_at(0, nullptr) == s->lr_at(0, nullptr));
    CHECK(copy->lr_at(5, nullptr) == s->lr_at(5, nullptr));
}
