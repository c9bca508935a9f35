#include "swarmcode/evaluation.hpp"

#include <algorithm>
#include <exception>

#include <omp.h>

#include "swarmcode/evolution.hpp"
#include "swarmcode/scenario.hpp"

namespace swarmcode {

namespace {

// Stream tags keep per-individual random streams disjoint from trial seeds.
constexpr std::uint64_t kPlanStream = 0x706c616eULL;
constexpr std::uint64_t kAssemblyStream = 0x61736d62ULL;

std::size_t sample_by_dominance(const std::vector<double>& dominance, double total, Rng& rng)
{
    if (!(total > 0.0))
        return rng.index(dominance.size());
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < dominance.size(); ++i) {
        acc += dominance[i];
        if (u < acc)
            return i;
    }
    // Rounding at the top end: last participant with non-zero weight.
    for (std::size_t i = dominance.size(); i-- > 0;)
        if (dominance[i] > 0.0)
            return i;
    return dominance.size() - 1;
}

void fill_slots(SwarmComposition& c, int swarm_size, Rng& rng)
{
    const std::size_t n = c.participants.size();
    if (static_cast<std::size_t>(swarm_size) < n)
        throw PlanError("assemble_swarm: swarm size " + std::to_string(swarm_size) +
                        " cannot seat " + std::to_string(n) + " participants");
    std::vector<double> dominance;
    double total = 0.0;
    for (const auto& g : c.participants) {
        dominance.push_back(g.dominance);
        total += g.dominance;
    }
    c.slots.clear();
    for (std::size_t i = 0; i < n; ++i)
        c.slots.push_back(i);
    while (c.slots.size() < static_cast<std::size_t>(swarm_size))
        c.slots.push_back(sample_by_dominance(dominance, total, rng));
}

}  // namespace

std::vector<int> SwarmComposition::counts() const
{
    std::vector<int> out(participants.size(), 0);
    for (auto s : slots)
        ++out[s];
    return out;
}

std::vector<const Genome*> SwarmComposition::robots() const
{
    std::vector<const Genome*> out;
    out.reserve(slots.size());
    for (auto s : slots)
        out.push_back(&participants[s]);
    return out;
}

std::vector<std::pair<const Genome*, int>> SwarmComposition::grouped() const
{
    std::vector<std::pair<const Genome*, int>> out;
    const auto c = counts();
    for (std::size_t i = 0; i < participants.size(); ++i)
        out.emplace_back(&participants[i], c[i]);
    return out;
}

SwarmComposition assemble_swarm(const Genome& focal, const std::vector<Genome>& partner_elites,
                                int swarm_size, Rng& rng)
{
    SwarmComposition c;
    c.has_focal = true;
    c.participants.push_back(focal);
    c.participants.insert(c.participants.end(), partner_elites.begin(), partner_elites.end());
    fill_slots(c, swarm_size, rng);
    return c;
}

SwarmComposition assemble_baseline(const std::vector<Genome>& partner_elites, int swarm_size,
                                   Rng& rng)
{
    SwarmComposition c;
    if (partner_elites.empty())
        return c;
    c.participants = partner_elites;
    fill_slots(c, swarm_size, rng);
    return c;
}

PopulationIndex::PopulationIndex(const std::vector<Genome>& population)
{
    for (const auto& g : population)
        by_id_[g.id] = &g;
}

const Genome& PopulationIndex::at(GenomeId id) const
{
    auto it = by_id_.find(id);
    if (it == by_id_.end())
        throw std::out_of_range("PopulationIndex: unknown genome id " + std::to_string(id));
    return *it->second;
}

std::vector<GenomeId> species_elites(const Species& s, const FitnessHistory& history, int elite_cap)
{
    std::vector<std::pair<double, GenomeId>> ranked;
    for (auto id : s.members) {
        auto it = history.find(id);
        ranked.emplace_back(it == history.end() ? 0.0 : it->second, id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const int n = elite_count(static_cast<int>(s.members.size()), elite_cap);
    std::vector<GenomeId> out;
    for (int i = 0; i < n; ++i)
        out.push_back(ranked[static_cast<std::size_t>(i)].second);
    return out;
}

EvaluationPlan make_plan(const Genome& focal, const SpeciesPartition& partition,
                         const PopulationIndex& index, const FitnessHistory& history,
                         const ScenarioConfig& scenario, std::uint64_t master_seed, int generation)
{
    EvaluationPlan plan;
    plan.n_trials = scenario.evaluation.n_trials;
    const auto gen = static_cast<std::uint64_t>(generation);
    for (int t = 0; t < plan.n_trials; ++t)
        plan.env_seeds.push_back(derive_seed({master_seed, gen, focal.id, static_cast<std::uint64_t>(t)}));

    auto partners = select_partners(focal, partition, scenario.distance.gamma);
    const auto max_partners = static_cast<std::size_t>(std::max(0, scenario.swarm_size - 1));
    if (partners.size() > max_partners) {
        // Keep the closest tags so every participant still gets a slot.
        std::vector<std::pair<double, SpeciesId>> ranked;
        for (auto id : partners)
            ranked.emplace_back(tag_distance(focal.tag, partition.find(id)->prototype.tag,
                                             scenario.distance.gamma), id);
        std::sort(ranked.begin(), ranked.end());
        partners.clear();
        for (std::size_t i = 0; i < max_partners; ++i)
            partners.push_back(ranked[i].second);
        std::sort(partners.begin(), partners.end());
    }

    Rng rng(derive_seed({master_seed, gen, focal.id, kPlanStream}));
    for (auto sid : partners) {
        const auto elites = species_elites(*partition.find(sid), history, scenario.evolution.elite_cap);
        plan.partner_species.push_back(sid);
        plan.partner_elites.push_back(index.at(elites[rng.index(elites.size())]));
    }
    return plan;
}

IndividualEvaluation evaluate_individual(const Genome& focal, const SpeciesPartition& partition,
                                         const EvaluationPlan& plan, const ScenarioConfig& scenario,
                                         std::uint64_t master_seed, int generation,
                                         std::optional<double> previous_smoothed)
{
    IndividualEvaluation ev;
    ev.genome_id = focal.id;
    ev.species_id = partition.assignment.count(focal.id) ? partition.species_of(focal.id) : 0;

    Rng rng(derive_seed({master_seed, static_cast<std::uint64_t>(generation), focal.id, kAssemblyStream}));
    ev.composition = assemble_swarm(focal, plan.partner_elites, scenario.swarm_size, rng);
    const SwarmComposition baseline = assemble_baseline(plan.partner_elites, scenario.swarm_size, rng);

    const auto focal_robots = ev.composition.robots();
    const auto baseline_robots = baseline.robots();
    double focal_sum = 0.0;
    double baseline_sum = 0.0;
    double delivered = 0.0, collab = 0.0, energy = 0.0;
    for (auto seed : plan.env_seeds) {
        try {
            const TrialStats s = run_trial(scenario.arena, scenario.packages, scenario.physics,
                                           focal_robots, seed);
            focal_sum += raw_fitness(s, scenario.fitness);
            delivered += s.n_delivered;
            collab += s.n_collab_delivered;
            energy += s.energy_avg_final;
            if (!baseline_robots.empty()) {
                const TrialStats b = run_trial(scenario.arena, scenario.packages, scenario.physics,
                                               baseline_robots, seed);
                baseline_sum += raw_fitness(b, scenario.fitness);
            }
        } catch (const std::exception& e) {
            throw EvaluationError(std::string("trial failed: ") + e.what(), focal.id, seed);
        }
    }
    const double trials = static_cast<double>(std::max<std::size_t>(1, plan.env_seeds.size()));
    ev.f_focal = focal_sum / trials;
    ev.f_baseline = baseline_robots.empty() ? 0.0 : baseline_sum / trials;

    auto& team = ev.team;
    team.species.push_back(ev.species_id);
    team.species.insert(team.species.end(), plan.partner_species.begin(), plan.partner_species.end());
    team.species_count = static_cast<int>(team.species.size());
    team.counts = ev.composition.counts();
    team.cost = swarm_cost(ev.composition.grouped(), team.species_count, scenario.budget);
    team.individual_deliveries = delivered / trials;
    team.collab_deliveries = collab / trials;
    team.deliveries = team.individual_deliveries + team.collab_deliveries;
    team.energy_used_pct = 100.0 * (1.0 - energy / trials);

    ev.budget_multiplier = budget_penalty(team.cost, scenario.budget);
    double base = ev.f_focal * ev.budget_multiplier;
    if (scenario.objective == Objective::Roi)
        base = roi_fitness(base, team.cost);

    const double value = gated_fitness(ev.f_focal, ev.f_baseline, base, scenario.evaluation.p_marginal);
    ev.record.raw = base;
    ev.record.marginal = ev.f_focal - ev.f_baseline;
    ev.record.gated = !(ev.record.marginal > 0.0);
    ev.record.smoothed = ema_smooth(previous_smoothed, value, scenario.evaluation.alpha);
    return ev;
}

namespace {

template <class Body>
std::vector<IndividualEvaluation> evaluate_all(const std::vector<Genome>& population,
                                               SpeciesPartition& partition,
                                               const ScenarioConfig& scenario, Body&& run_loop)
{
    std::vector<IndividualEvaluation> results(population.size());
    std::vector<std::exception_ptr> errors(population.size());
    run_loop(results, errors);
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::map<GenomeId, double> smoothed;
    for (const auto& r : results)
        smoothed[r.genome_id] = r.record.smoothed;
    for (auto& s : partition.species) {
        double total = 0.0;
        for (auto id : s.members)
            total += smoothed.at(id);
        if (scenario.evaluation.fitness_sharing)
            total /= static_cast<double>(s.members.size());
        s.total_adjusted_fitness = total;
    }
    return results;
}

IndividualEvaluation evaluate_one(const Genome& g, const SpeciesPartition& partition,
                                  const PopulationIndex& index, const FitnessHistory& history,
                                  const ScenarioConfig& scenario, std::uint64_t master_seed,
                                  int generation)
{
    const EvaluationPlan plan = make_plan(g, partition, index, history, scenario, master_seed, generation);
    auto it = history.find(g.id);
    std::optional<double> prev;
    if (it != history.end())
        prev = it->second;
    return evaluate_individual(g, partition, plan, scenario, master_seed, generation, prev);
}

}  // namespace

std::vector<IndividualEvaluation> evaluate_generation(const std::vector<Genome>& population,
                                                      SpeciesPartition& partition,
                                                      const FitnessHistory& history,
                                                      const ScenarioConfig& scenario,
                                                      std::uint64_t master_seed, int generation)
{
    const PopulationIndex index(population);
    return evaluate_all(population, partition, scenario, [&](auto& results, auto& errors) {
        const long n = static_cast<long>(population.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            try {
                results[k] = evaluate_one(population[k], partition, index, history, scenario,
                                          master_seed, generation);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    });
}

std::vector<IndividualEvaluation> evaluate_generation_serial(const std::vector<Genome>& population,
                                                             SpeciesPartition& partition,
                                                             const FitnessHistory& history,
                                                             const ScenarioConfig& scenario,
                                                             std::uint64_t master_seed,
                                                             int generation)
{
    const PopulationIndex index(population);
    return evaluate_all(population, partition, scenario, [&](auto& results, auto& errors) {
        for (std::size_t k = 0; k < population.size(); ++k) {
            try {
                results[k] = evaluate_one(population[k], partition, index, history, scenario,
                                          master_seed, generation);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    });
}

}  // namespace swarmcode
