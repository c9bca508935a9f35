#include "swarmcode/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace swarmcode {

int elite_count(int species_size, int elite_cap)
{
    if (species_size < 1)
        throw std::domain_error("elite_count: species size must be >= 1");
    return std::max(1, std::min(elite_cap, species_size / 5 + 1));
}

std::vector<int> apportion(const std::vector<double>& weights, int slots)
{
    if (slots < 0)
        throw std::domain_error("apportion: negative slot count");
    const std::size_t n = weights.size();
    std::vector<int> out(n, 0);
    if (n == 0)
        return out;
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::max(0.0, weights[i]);
        total += w[i];
    }
    if (!(total > 0.0)) {
        std::fill(w.begin(), w.end(), 1.0);
        total = static_cast<double>(n);
    }
    int assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = slots * w[i] / total;
        out[i] = static_cast<int>(std::floor(exact));
        assigned += out[i];
        // Zero-weight entries rank below any real remainder.
        remainders.emplace_back(w[i] > 0.0 ? exact - out[i] : -1.0, i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < slots; k = (k + 1) % n) {
        ++out[remainders[k].second];
        ++assigned;
    }
    return out;
}

std::map<SpeciesId, int> allocate_offspring(const std::vector<Species>& species, int slots)
{
    std::vector<double> w;
    for (const auto& s : species)
        w.push_back(s.total_adjusted_fitness);
    const auto q = apportion(w, slots);
    std::map<SpeciesId, int> out;
    for (std::size_t i = 0; i < species.size(); ++i)
        out[species[i].id] = q[i];
    return out;
}

const Genome* tournament(const std::vector<const Genome*>& candidates, const FitnessHistory& fitness,
                         int size, Rng& rng, const Genome* exclude)
{
    std::vector<const Genome*> pool;
    for (const Genome* g : candidates)
        if (g != exclude)
            pool.push_back(g);
    if (pool.empty())
        pool = candidates;
    const Genome* best = nullptr;
    double best_f = 0.0;
    for (int i = 0; i < std::max(1, size); ++i) {
        const Genome* g = pool[rng.index(pool.size())];
        auto it = fitness.find(g->id);
        const double f = it == fitness.end() ? 0.0 : it->second;
        if (!best || f > best_f || (f == best_f && g->id < best->id)) {
            best = g;
            best_f = f;
        }
    }
    return best;
}

ParentSelection select_parents(const Species& species, const PopulationIndex& index,
                               const std::vector<Genome>& population, const FitnessHistory& fitness,
                               const ScenarioConfig& scenario, Rng& rng)
{
    std::vector<const Genome*> members;
    for (auto id : species.members)
        members.push_back(&index.at(id));
    const auto& evo = scenario.evolution;
    const DistanceWeights w = effective_distance(scenario);

    ParentSelection sel;
    sel.first = tournament(members, fitness, evo.tournament_size, rng);
    for (int a = 0; a < evo.max_partner_retries; ++a) {
        const Genome* c = tournament(members, fitness, evo.tournament_size, rng, sel.first);
        ++sel.attempts;
        if (compatibility_distance(*sel.first, *c, w) < evo.delta) {
            sel.second = c;
            return sel;
        }
    }
    std::vector<const Genome*> everyone;
    for (const auto& g : population)
        everyone.push_back(&g);
    sel.second = tournament(everyone, fitness, evo.tournament_size, rng, sel.first);
    sel.used_global = true;
    return sel;
}

Offspring make_offspring(const Genome& p1, const Genome& p2, const SpeciesPartition& partition,
                         const ScenarioConfig& scenario, Rng& rng)
{
    Offspring o;
    auto s1 = partition.assignment.find(p1.id);
    auto s2 = partition.assignment.find(p2.id);
    o.same_species = s1 != partition.assignment.end() && s2 != partition.assignment.end() &&
                     s1->second == s2->second;
    const double p = o.same_species ? scenario.evolution.intra_crossover_p
                                    : scenario.evolution.inter_crossover_p;
    o.crossed = rng.bernoulli(p);
    Genome child = o.crossed ? crossover(p1, p2, rng, scenario.mutation.crossover_style) : p1;
    o.genome = mutate(child, scenario.genome, scenario.mutation, rng);
    o.genome.behavior.opcodes =
        canonicalize(o.genome.behavior.opcodes, static_cast<std::size_t>(scenario.genome.bt_length));
    return o;
}

namespace {

SpeciesTraits summarize(const Species& s, const PopulationIndex& index, const FitnessHistory& fitness)
{
    SpeciesTraits t;
    t.size = static_cast<int>(s.members.size());
    for (auto id : s.members) {
        const auto& g = index.at(id);
        const auto& hw = g.hardware;
        t.radius += hw.radius;
        t.chassis_tier += hw.chassis_tier;
        t.battery_tier += hw.battery_tier;
        t.motor_tier += hw.motor_tier;
        t.pincher_fraction += hw.end_effector == EndEffector::Pincher ? 1.0 : 0.0;
        t.torque_setpoint += hw.torque_setpoint;
        t.battery_setpoint += hw.battery_setpoint;
        t.selectivity += g.selectivity;
        t.dominance += g.dominance;
        t.mean_fitness += fitness.at(id);
    }
    const double n = std::max(1, t.size);
    for (double* x : {&t.radius, &t.chassis_tier, &t.battery_tier, &t.motor_tier, &t.pincher_fraction,
                      &t.torque_setpoint, &t.battery_setpoint, &t.selectivity, &t.dominance, &t.mean_fitness})
        *x /= n;
    return t;
}

}  // namespace

EvolutionState initial_state(const ScenarioConfig& scenario, std::uint64_t master_seed)
{
    EvolutionState st;
    st.rng = Rng(derive_seed({master_seed, 0x696e6974ULL}));
    for (int i = 0; i < scenario.evolution.population_size; ++i) {
        Genome g = random_genome(scenario.genome, st.rng);
        g.id = st.next_genome_id++;
        st.population.push_back(std::move(g));
    }
    return st;
}

GenerationReport step_generation(EvolutionState& state, const ScenarioConfig& scenario,
                                 std::uint64_t master_seed, Parallelism mode)
{
    const auto t0 = std::chrono::steady_clock::now();
    EvolutionState next = state;
    const auto& evo = scenario.evolution;

    SpeciesPartition partition =
        assign_species(next.population, state.partition, evo.delta, effective_distance(scenario));

    const auto evals = mode == Parallelism::OpenMP
        ? evaluate_generation(next.population, partition, state.fitness, scenario, master_seed, state.generation)
        : evaluate_generation_serial(next.population, partition, state.fitness, scenario, master_seed,
                                     state.generation);

    GenerationReport report;
    report.generation = state.generation + 1;

    FitnessHistory fitness;
    const IndividualEvaluation* best = nullptr;
    double sum = 0.0;
    for (const auto& ev : evals) {
        fitness[ev.genome_id] = ev.record.smoothed;
        sum += ev.record.smoothed;
        if (!best || ev.record.smoothed > best->record.smoothed ||
            (ev.record.smoothed == best->record.smoothed && ev.genome_id < best->genome_id))
            best = &ev;
    }
    report.mean_fitness = evals.empty() ? 0.0 : sum / static_cast<double>(evals.size());
    if (best) {
        report.best = {best->genome_id, best->species_id, best->record.smoothed, best->composition, best->team};
        next.best = report.best;
    }

    const PopulationIndex index(next.population);
    std::set<SpeciesId> before, after;
    for (const auto& s : state.partition.species)
        before.insert(s.id);
    for (const auto& s : partition.species) {
        after.insert(s.id);
        report.census[s.id] = static_cast<int>(s.members.size());
        report.traits[s.id] = summarize(s, index, fitness);
    }
    std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                        std::back_inserter(report.founded));

    // Reproduction. Each species' slot share covers its elites first; a
    // species allotted nothing goes extinct.
    const auto quotas = allocate_offspring(partition.species, evo.population_size);
    std::set<SpeciesId> gone;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::inserter(gone, gone.end()));
    for (const auto& [id, q] : quotas)
        if (q <= 0)
            gone.insert(id);
    report.extinct.assign(gone.begin(), gone.end());
    std::vector<Genome> offspring_pop;
    offspring_pop.reserve(static_cast<std::size_t>(evo.population_size));
    SpeciesPartition carried;
    carried.next_id = partition.next_id;
    for (const auto& s : partition.species) {
        const int quota = quotas.at(s.id);
        if (quota <= 0)
            continue;
        carried.species.push_back(s);
        const auto elites = species_elites(s, fitness, evo.elite_cap);
        const int n_elite = std::min<int>(quota, static_cast<int>(elites.size()));
        for (int i = 0; i < n_elite; ++i)
            offspring_pop.push_back(index.at(elites[static_cast<std::size_t>(i)]));
        for (int i = n_elite; i < quota; ++i) {
            const auto parents = select_parents(s, index, next.population, fitness, scenario, next.rng);
            Offspring o = make_offspring(*parents.first, *parents.second, partition, scenario, next.rng);
            o.genome.id = next.next_genome_id++;
            offspring_pop.push_back(std::move(o.genome));
        }
    }
    for (const auto& s : carried.species)
        for (auto id : s.members)
            carried.assignment[id] = s.id;

    // Only surviving ids keep their smoothing history.
    FitnessHistory kept;
    for (const auto& g : offspring_pop)
        if (auto it = fitness.find(g.id); it != fitness.end())
            kept[g.id] = it->second;

    next.population = std::move(offspring_pop);
    next.partition = std::move(carried);
    next.fitness = std::move(kept);
    next.generation = state.generation + 1;

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    state = std::move(next);
    return report;
}

std::optional<BestTeam> best_team(const EvolutionState& state)
{
    return state.best;
}

}  // namespace swarmcode
