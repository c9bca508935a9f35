#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "swarmcode/evolution.hpp"

using namespace swarmcode;

namespace {

ScenarioConfig tiny_scenario()
{
    ScenarioConfig s;
    s.swarm_size = 4;
    s.physics.ticks = 100;
    s.evaluation.n_trials = 1;
    s.evolution.population_size = 8;
    return s;
}

std::vector<Genome> numbered(int n, Rng& rng)
{
    std::vector<Genome> pop;
    for (int i = 0; i < n; ++i) {
        pop.push_back(random_genome(GenomeConfig{}, rng));
        pop.back().id = static_cast<GenomeId>(i + 1);
    }
    return pop;
}

Species species_of(const std::vector<Genome>& pop, SpeciesId id)
{
    Species s;
    s.id = id;
    s.prototype = pop.front();
    for (const auto& g : pop)
        s.members.push_back(g.id);
    return s;
}

}  // namespace

TEST_CASE("elite_count: examples")
{
    CHECK(elite_count(1, 3) == 1);
    CHECK(elite_count(25, 3) == 3);
    CHECK(elite_count(25, 10) == 6);
    CHECK_THROWS_AS(elite_count(0, 3), std::domain_error);
}

TEST_CASE("elite_count: brute force over sizes 1..1000 and caps 1..20")
{
    for (int n = 1; n <= 1000; ++n)
        for (int e = 1; e <= 20; ++e)
            REQUIRE(elite_count(n, e) == oracle::elite_count(n, e));
}

TEST_CASE("allocate_offspring: examples")
{
    Species a, b, c;
    a.id = 1, b.id = 2, c.id = 3;
    a.total_adjusted_fitness = 3.0;
    CHECK(allocate_offspring({a}, 7).at(1) == 7);
    b.total_adjusted_fitness = 1.0;
    const auto q = allocate_offspring({a, b}, 4);
    CHECK(q.at(1) == 3);
    CHECK(q.at(2) == 1);
    a.total_adjusted_fitness = b.total_adjusted_fitness = c.total_adjusted_fitness = 1.0;
    const auto r = allocate_offspring({a, b, c}, 10);
    int sum = 0;
    for (auto [id, n] : r) {
        CHECK((n == 3 || n == 4));
        sum += n;
    }
    CHECK(sum == 10);
    CHECK_THROWS_AS(apportion({1.0}, -1), std::domain_error);
}

TEST_CASE("apportion: zero weights get nothing unless all are zero")
{
    CHECK(apportion({0.0, 2.0, 0.0}, 5) == std::vector<int>{0, 5, 0});
    const auto u = apportion({0.0, 0.0, 0.0}, 7);
    CHECK(std::accumulate(u.begin(), u.end(), 0) == 7);
    for (int n : u)
        CHECK((n == 2 || n == 3));
}

TEST_CASE("property: apportion sums exactly and matches the oracle")
{
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        std::vector<double> w(1 + rng.index(12));
        for (auto& x : w)
            x = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.001, 100.0);
        if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; }))
            w[0] = 1.0;
        const int slots = rng.uniform_int(0, 200);
        const auto q = apportion(w, slots);
        REQUIRE(std::accumulate(q.begin(), q.end(), 0) == slots);
        // The oracle breaks remainder ties by first index as well.
        REQUIRE(q == oracle::apportion(w, slots));
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double exact = slots * w[k] / std::accumulate(w.begin(), w.end(), 0.0);
            REQUIRE(q[k] >= std::floor(exact) - 1e-9);
            REQUIRE(q[k] <= std::ceil(exact) + 1e-9);
        }
    }
}

TEST_CASE("tournament: the fittest contestant wins")
{
    Rng rng(2);
    const auto pop = numbered(10, rng);
    std::vector<const Genome*> cands;
    FitnessHistory fit;
    for (const auto& g : pop) {
        cands.push_back(&g);
        fit[g.id] = rng.uniform(0, 100);
    }
    for (int i = 0; i < 2000; ++i) {
        Rng probe = rng;
        const Genome* best = nullptr;
        for (int k = 0; k < 3; ++k) {
            const Genome* g = cands[probe.index(cands.size())];
            if (!best || fit[g->id] > fit[best->id])
                best = g;
        }
        REQUIRE(tournament(cands, fit, 3, rng) == best);
    }
}

TEST_CASE("select_parents: compatible clone pair is accepted on the first attempt")
{
    ScenarioConfig s;
    Rng rng(3);
    std::vector<Genome> pop = numbered(1, rng);
    pop.push_back(pop[0]);
    pop[1].id = 2;
    const Species sp = species_of(pop, 1);
    const PopulationIndex index(pop);
    const auto sel = select_parents(sp, index, pop, {}, s, rng);
    CHECK(sel.attempts == 1);
    CHECK_FALSE(sel.used_global);
    CHECK(sel.first->same_genes(*sel.second));
}

TEST_CASE("select_parents: incompatible species falls back after exactly 5 attempts")
{
    ScenarioConfig s;
    s.evolution.delta = 0.05;
    Rng rng(4);
    std::vector<Genome> pop = numbered(6, rng);
    // Opposite tags put every pair far apart.
    for (std::size_t i = 0; i < pop.size(); ++i)
        for (auto& b : pop[i].tag.bits)
            b = static_cast<std::uint8_t>((i + (&b - pop[i].tag.bits.data())) % 2);
    const DistanceWeights w = effective_distance(s);
    std::vector<Genome> members(pop.begin(), pop.begin() + 3);
    for (const auto& a : members)
        for (const auto& b : members)
            if (a.id != b.id)
                REQUIRE(compatibility_distance(a, b, w) >= s.evolution.delta);
    const Species sp = species_of(members, 1);
    const PopulationIndex index(pop);
    for (int i = 0; i < 50; ++i) {
        const auto sel = select_parents(sp, index, pop, {}, s, rng);
        CHECK(sel.attempts == 5);
        CHECK(sel.used_global);
        CHECK(sel.second != sel.first);
    }
}

TEST_CASE("make_offspring: crossover rates within and across species")
{
    ScenarioConfig s;
    Rng rng(5);
    const auto pop = numbered(2, rng);
    SpeciesPartition same, cross;
    same.assignment = {{1, 1}, {2, 1}};
    cross.assignment = {{1, 1}, {2, 2}};

    int crossed = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto o = make_offspring(pop[0], pop[1], same, s, rng);
        REQUIRE(o.same_species);
        crossed += o.crossed;
    }
    CHECK(std::abs(crossed / double(n) - 0.70) <= 0.02);

    crossed = 0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const auto o = make_offspring(pop[0], pop[1], cross, s, rng);
        REQUIRE_FALSE(o.same_species);
        crossed += o.crossed;
    }
    CHECK(std::abs(crossed / double(m) - 0.025) <= 0.003);
}

TEST_CASE("make_offspring: zero crossover gives a mutated clone of the first parent")
{
    ScenarioConfig s;
    s.evolution.intra_crossover_p = 0.0;
    s.mutation.tag_flip_p = s.mutation.selectivity_p = s.mutation.dominance_p = 0.0;
    s.mutation.radius_p = s.mutation.setpoint_p = s.mutation.tier_p = 0.0;
    s.mutation.effector_p = s.mutation.bt_p = 0.0;
    Rng rng(6);
    const auto pop = numbered(2, rng);
    SpeciesPartition same;
    same.assignment = {{1, 1}, {2, 1}};
    for (int i = 0; i < 100; ++i) {
        const auto o = make_offspring(pop[0], pop[1], same, s, rng);
        CHECK_FALSE(o.crossed);
        CHECK(o.genome.same_genes(pop[0]));
    }
}

TEST_CASE("step_generation: clones form one species")
{
    ScenarioConfig s = tiny_scenario();
    EvolutionState st = initial_state(s, 7);
    for (auto& g : st.population) {
        const auto id = g.id;
        g = st.population[0];
        g.id = id;
    }
    const auto report = step_generation(st, s, 7);
    CHECK(report.census.size() == 1u);
    CHECK(report.census.begin()->second == 8);
}

TEST_CASE("step_generation: elites survive unchanged and the population size is conserved")
{
    ScenarioConfig s = tiny_scenario();
    EvolutionState st = initial_state(s, 9);
    for (int gen = 0; gen < 50; ++gen) {
        const auto before = st.population;
        const auto report = step_generation(st, s, 9);
        REQUIRE(st.population.size() == 8u);
        int census = 0;
        for (auto [id, n] : report.census)
            census += n;
        REQUIRE(census == 8);
        // The best individual is an elite of a species with a positive quota.
        const auto it = std::find_if(st.population.begin(), st.population.end(),
                                     [&](const Genome& g) { return g.id == report.best.genome_id; });
        REQUIRE(it != st.population.end());
        const auto old = std::find_if(before.begin(), before.end(),
                                      [&](const Genome& g) { return g.id == report.best.genome_id; });
        REQUIRE(old != before.end());
        REQUIRE(it->same_genes(*old));
        // Best team bounds.
        REQUIRE(report.best.team.species_count <= static_cast<int>(report.census.size()));
        double max_fit = 0.0;
        for (const auto& [id, f] : st.fitness)
            max_fit = std::max(max_fit, f);
        REQUIRE(report.best.fitness >= max_fit);
        REQUIRE(report.best.composition.size() == 4u);
    }
    REQUIRE(best_team(st).has_value());
    CHECK(best_team(st)->genome_id != kUnassignedId);
}

TEST_CASE("step_generation: no best team before the first evaluation")
{
    const EvolutionState st = initial_state(tiny_scenario(), 1);
    CHECK_FALSE(best_team(st).has_value());
}

TEST_CASE("determinism: same master seed gives identical runs, serial or parallel")
{
    ScenarioConfig s = tiny_scenario();
    EvolutionState a = initial_state(s, 11);
    EvolutionState b = initial_state(s, 11);
    for (int gen = 0; gen < 6; ++gen) {
        const auto ra = step_generation(a, s, 11);
        const auto rb = step_generation(b, s, 11, Parallelism::Serial);
        REQUIRE(ra.census == rb.census);
        REQUIRE(ra.best.genome_id == rb.best.genome_id);
        REQUIRE(ra.best.fitness == rb.best.fitness);
        REQUIRE(ra.mean_fitness == rb.mean_fitness);
        REQUIRE(ra.founded == rb.founded);
        REQUIRE(ra.extinct == rb.extinct);
    }
    REQUIRE(a.population.size() == b.population.size());
    for (std::size_t i = 0; i < a.population.size(); ++i) {
        CHECK(a.population[i].id == b.population[i].id);
        CHECK(a.population[i].same_genes(b.population[i]));
    }
    CHECK(a.rng.state() == b.rng.state());
}
