#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "swarmcode/evaluation.hpp"
#include "swarmcode/genome.hpp"
#include "swarmcode/rng.hpp"
#include "swarmcode/scenario.hpp"
#include "swarmcode/speciation.hpp"

namespace swarmcode {

// max(1, min(E, floor(species_size / 5) + 1)). Throws std::domain_error when
// species_size < 1.
int elite_count(int species_size, int elite_cap);

// Largest-remainder apportionment of `slots` by weight. Quotas sum to
// `slots`; zero-weight entries get nothing unless every weight is zero.
// Ties in remainders go to the earlier entry.
std::vector<int> apportion(const std::vector<double>& weights, int slots);

// Quotas keyed by species id, proportional to total adjusted fitness.
std::map<SpeciesId, int> allocate_offspring(const std::vector<Species>& species, int slots);

struct ParentSelection {
    const Genome* first = nullptr;
    const Genome* second = nullptr;
    int attempts = 0;           // intra-species tournaments for the second parent
    bool used_global = false;   // second parent came from the global tournament
};

// Tournament of `size` draws with replacement; the highest fitness wins,
// ties to the lower genome id. `exclude` is skipped when other candidates
// exist.
const Genome* tournament(const std::vector<const Genome*>& candidates, const FitnessHistory& fitness,
                         int size, Rng& rng, const Genome* exclude = nullptr);

ParentSelection select_parents(const Species& species, const PopulationIndex& index,
                               const std::vector<Genome>& population, const FitnessHistory& fitness,
                               const ScenarioConfig& scenario, Rng& rng);

struct Offspring {
    Genome genome;
    bool crossed = false;
    bool same_species = false;
};

Offspring make_offspring(const Genome& p1, const Genome& p2, const SpeciesPartition& partition,
                         const ScenarioConfig& scenario, Rng& rng);

struct BestTeam {
    GenomeId genome_id = kUnassignedId;
    SpeciesId species_id = 0;
    double fitness = 0.0;
    SwarmComposition composition;
    TeamSummary team;
};

// Per-species means of the evaluated members' traits.
struct SpeciesTraits {
    int size = 0;
    double radius = 0.0;
    double chassis_tier = 0.0;
    double battery_tier = 0.0;
    double motor_tier = 0.0;
    double pincher_fraction = 0.0;
    double torque_setpoint = 0.0;
    double battery_setpoint = 0.0;
    double selectivity = 0.0;
    double dominance = 0.0;
    double mean_fitness = 0.0;
};

struct GenerationReport {
    int generation = 0;
    std::map<SpeciesId, int> census;
    std::map<SpeciesId, SpeciesTraits> traits;
    BestTeam best;
    std::vector<SpeciesId> founded;
    std::vector<SpeciesId> extinct;
    double mean_fitness = 0.0;
    double wall_seconds = 0.0;  // not part of the deterministic log
};

struct EvolutionState {
    int generation = 0;  // generations completed
    std::vector<Genome> population;
    SpeciesPartition partition;
    FitnessHistory fitness;
    GenomeId next_genome_id = 1;
    Rng rng;
    std::optional<BestTeam> best;  // from the latest evaluation
};

EvolutionState initial_state(const ScenarioConfig& scenario, std::uint64_t master_seed);

enum class Parallelism : std::uint8_t { OpenMP, Serial };

// speciation -> evaluation -> elitism -> quotas -> mating/mutation. On
// error `state` is left untouched.
GenerationReport step_generation(EvolutionState& state, const ScenarioConfig& scenario,
                                 std::uint64_t master_seed, Parallelism mode = Parallelism::OpenMP);

std::optional<BestTeam> best_team(const EvolutionState& state);

}  // namespace swarmcode
