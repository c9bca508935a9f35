#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "swarmcode/fitness.hpp"
#include "swarmcode/rng.hpp"

using namespace swarmcode;

namespace {

const double kWeights[6] = {100.0, 50.0, 1.0, 0.03, 1.0, 30.0};

struct Pair {
    TrialStats stats;
    oracle::Stats mirror;
};

Pair random_stats(Rng& rng)
{
    Pair p;
    auto& s = p.stats;
    auto& m = p.mirror;
    m.delivered = s.n_delivered = rng.bernoulli(0.4) ? rng.uniform_int(0, 8) : 0;
    m.collab_delivered = s.n_collab_delivered = rng.bernoulli(0.3) ? rng.uniform_int(0, 2) : 0;
    m.picked = s.n_picked = s.n_delivered + rng.uniform_int(0, 3);
    m.collab_picked = s.n_collab_picked = s.n_collab_delivered + rng.uniform_int(0, 1);
    m.grips_delivered = s.grip_delivered_sum = s.n_collab_delivered * rng.uniform_int(2, 4);
    m.energy_fraction = s.energy_avg_final = rng.uniform();
    const int robots = rng.uniform_int(0, 12);
    for (int i = 0; i < robots; ++i) {
        const double v = rng.bernoulli(0.3) ? proximity_score(rng.uniform(0, 10)) : 0.0;
        s.proximity_scores.push_back(v);
        m.scores.push_back(v);
    }
    const int moved = rng.uniform_int(0, 6);
    for (int i = 0; i < moved; ++i) {
        const double v = rng.uniform(-0.5, 1.0);
        s.closeness_progress.push_back(v);
        m.progress.push_back(v);
    }
    return p;
}

HardwareGenes hardware(int chassis, int motor, int battery, EndEffector e, double radius)
{
    HardwareGenes h;
    h.chassis_tier = chassis;
    h.motor_tier = motor;
    h.battery_tier = battery;
    h.end_effector = e;
    h.radius = radius;
    return h;
}

}  // namespace

TEST_CASE("raw_fitness: examples")
{
    const FitnessWeights w;
    CHECK(raw_fitness(TrialStats{}, w) == 0.1);

    TrialStats four;
    four.n_delivered = 4;
    CHECK(raw_fitness(four, w) == 400.0);

    TrialStats collab;
    collab.n_collab_delivered = 1;
    collab.grip_delivered_sum = 2;
    collab.n_collab_picked = 1;
    const FitnessTerms t = fitness_terms(collab, w);
    CHECK(t.collab == 250.0);
    CHECK(t.pickup == 1.0);
    CHECK(raw_fitness(collab, w) == 251.0);

    // Pickups without a delivery keep the activity penalty.
    TrialStats picked;
    picked.n_picked = 10;
    CHECK(raw_fitness(picked, w) == 5.0);
}

TEST_CASE("raw_fitness: matches the oracle on random stats")
{
    const FitnessWeights w;
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        const Pair p = random_stats(rng);
        const double got = raw_fitness(p.stats, w);
        REQUIRE(oracle::rel_close(got, oracle::raw_fitness(p.mirror, kWeights), 1e-12));
        REQUIRE(got >= 0.1);
    }
}

TEST_CASE("property: raw_fitness is non-decreasing in deliveries")
{
    const FitnessWeights w;
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        Pair p = random_stats(rng);
        double prev = raw_fitness(p.stats, w);
        for (int k = 0; k < 4; ++k) {
            ++p.stats.n_delivered;
            const double next = raw_fitness(p.stats, w);
            REQUIRE(next >= prev);
            prev = next;
        }
    }
}

TEST_CASE("swarm_cost: examples")
{
    BudgetModel b;
    b.species_fee = 500.0;
    CHECK(swarm_cost({}, 0, b) == 0.0);

    Genome g;
    g.hardware = hardware(2, 2, 2, EndEffector::Pincher, 0.3);
    const double unit = 100.0 + 90.0 + 70.0 + 35.0 + 100.0 * 0.3;
    CHECK(unit_cost(g.hardware, b.costs) == doctest::Approx(unit).epsilon(1e-15));
    const std::pair<const Genome*, int> one[] = {{&g, 20}};
    CHECK(swarm_cost(one, 1, b) == doctest::Approx(20 * unit + 500.0).epsilon(1e-15));

    Genome h;
    h.hardware = hardware(1, 1, 1, EndEffector::Suction, 0.1);
    const std::pair<const Genome*, int> two[] = {{&g, 20}, {&h, 3}};
    const double added = swarm_cost(two, 2, b) - swarm_cost(one, 1, b);
    CHECK(added == doctest::Approx(500.0 + 3 * unit_cost(h.hardware, b.costs)).epsilon(1e-12));
}

TEST_CASE("budget_penalty: examples")
{
    BudgetModel b;
    b.budget = 5000.0;
    CHECK(budget_penalty(5000.0, b) == 1.0);
    CHECK(budget_penalty(4000.0, b) == 1.0);
    CHECK(std::abs(budget_penalty(6000.0, b) - 0.36787944117144233) <= 1e-9);
    CHECK(budget_penalty(5000.0 + 1e7, b) == 0.05);
    b.budget = std::numeric_limits<double>::infinity();
    CHECK(budget_penalty(1e12, b) == 1.0);
}

TEST_CASE("property: budget_penalty is bounded, monotone, continuous and matches the oracle")
{
    BudgetModel b;
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        b.budget = rng.uniform(0, 10000);
        b.lambda = rng.uniform(0, 0.01);
        double prev = 1.0;
        for (double dc = -100.0; dc < 5000.0; dc += rng.uniform(0, 300)) {
            const double p = budget_penalty(b.budget + dc, b);
            REQUIRE(p >= 0.05);
            REQUIRE(p <= 1.0);
            REQUIRE(p <= prev);
            REQUIRE(oracle::rel_close(p, oracle::budget_penalty(b.budget + dc, b.budget, b.lambda, 0.05), 1e-12));
            prev = p;
        }
        // Continuity at the budget boundary.
        REQUIRE(std::abs(budget_penalty(b.budget + 1e-9, b) - 1.0) < 1e-9);
    }
}

TEST_CASE("gated_fitness: examples")
{
    CHECK(gated_fitness(200, 150, 200, 0.25) == 200.0);
    CHECK(gated_fitness(100, 150, 100, 0.25) == 25.0);
    CHECK(gated_fitness(150, 150, 80, 0.25) == 20.0);
}

TEST_CASE("property: the gate depends only on the sign of the marginal")
{
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const double f = rng.uniform(0.1, 1000), g = rng.uniform(0.1, 1000), base = rng.uniform(0.1, 1000);
        const double k = std::exp2(rng.uniform_int(-10, 10));  // exact scaling
        const bool gated = gated_fitness(f, g, base, 0.25) != base;
        REQUIRE(gated == (gated_fitness(k * f, k * g, base, 0.25) != base));
        REQUIRE(gated_fitness(f, g, base, 0.25) == oracle::gated(f, g, base, 0.25));
    }
}

TEST_CASE("ema_smooth: examples and oracle")
{
    CHECK(ema_smooth(std::nullopt, 100.0, 0.6) == 100.0);
    CHECK(ema_smooth(100.0, 0.0, 0.6) == doctest::Approx(60.0).epsilon(1e-15));
    double v = 42.0;
    for (int i = 0; i < 50; ++i)
        v = ema_smooth(v, 42.0, 0.6);
    CHECK(v == doctest::Approx(42.0).epsilon(1e-14));
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const std::optional<double> prev = rng.bernoulli(0.2) ? std::nullopt : std::optional(rng.uniform(0, 500));
        const double x = rng.uniform(0, 500), a = rng.uniform();
        REQUIRE(ema_smooth(prev, x, a) == oracle::ema(prev, x, a));
    }
}

TEST_CASE("roi_fitness: examples")
{
    CHECK(roi_fitness(510.0, 5100.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(std::isfinite(roi_fitness(510.0, 0.0)));
    CHECK(roi_fitness(510.0, 0.0) == 510.0);
    CHECK(roi_fitness(300.0, 2000.0) == 2.0 * roi_fitness(300.0, 4000.0));
}

TEST_CASE("property: final fitness is raw fitness times the budget multiplier")
{
    const FitnessWeights w;
    BudgetModel b;
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const Pair p = random_stats(rng);
        b.budget = rng.uniform(0, 5000);
        const double cost = rng.uniform(0, 8000);
        const double raw = raw_fitness(p.stats, w);
        const double f = raw * budget_penalty(cost, b);
        REQUIRE(oracle::rel_close(
            f, oracle::raw_fitness(p.mirror, kWeights) * oracle::budget_penalty(cost, b.budget, b.lambda, b.floor),
            1e-12));
    }
}

TEST_CASE("budget model: validation names the field")
{
    BudgetModel b;
    b.floor = 1.0;
    CHECK_THROWS_WITH_AS(b.validate(), doctest::Contains("budget.floor"), ConfigError);
    b = BudgetModel{};
    b.costs.motor[1] = -1.0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
}
