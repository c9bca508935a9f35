#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmcode/fitness.hpp"
#include "swarmcode/genome.hpp"
#include "swarmcode/rng.hpp"
#include "swarmcode/speciation.hpp"

namespace swarmcode {

struct ScenarioConfig;

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, GenomeId genome, std::uint64_t seed)
        : std::runtime_error(what), genome_id(genome), trial_seed(seed)
    {
    }
    GenomeId genome_id;
    std::uint64_t trial_seed;
};

// A physical swarm: `slots[i]` indexes into `participants`.
struct SwarmComposition {
    std::vector<Genome> participants;
    std::vector<std::size_t> slots;
    bool has_focal = false;  // participant 0 is the focal individual

    std::size_t size() const { return slots.size(); }
    std::vector<int> counts() const;
    std::vector<const Genome*> robots() const;
    std::vector<std::pair<const Genome*, int>> grouped() const;
};

// Focal plus one guaranteed slot per partner; the remaining slots are drawn
// with probability proportional to dominance (uniform if all are zero).
SwarmComposition assemble_swarm(const Genome& focal, const std::vector<Genome>& partner_elites,
                                int swarm_size, Rng& rng);

// Same as assemble_swarm without the focal individual. Empty when there are
// no partners.
SwarmComposition assemble_baseline(const std::vector<Genome>& partner_elites, int swarm_size,
                                   Rng& rng);

// Prior fitness (smoothed) by genome id; absent for never-evaluated genomes.
using FitnessHistory = std::map<GenomeId, double>;

// Genomes of the current population indexed by id.
class PopulationIndex {
public:
    explicit PopulationIndex(const std::vector<Genome>& population);
    const Genome& at(GenomeId id) const;

private:
    std::map<GenomeId, const Genome*> by_id_;
};

// Top elite_count(size, E) members of a species by prior fitness, ties to
// the lower genome id.
std::vector<GenomeId> species_elites(const Species& s, const FitnessHistory& history, int elite_cap);

struct EvaluationPlan {
    int n_trials = 3;
    std::vector<std::uint64_t> env_seeds;  // shared by focal and baseline trials
    std::vector<SpeciesId> partner_species;
    std::vector<Genome> partner_elites;
};

EvaluationPlan make_plan(const Genome& focal, const SpeciesPartition& partition,
                         const PopulationIndex& index, const FitnessHistory& history,
                         const ScenarioConfig& scenario, std::uint64_t master_seed, int generation);

struct TeamSummary {
    double cost = 0.0;
    int species_count = 0;
    double deliveries = 0.0;  // mean over focal trials
    double individual_deliveries = 0.0;
    double collab_deliveries = 0.0;
    double energy_used_pct = 0.0;
    std::vector<SpeciesId> species;  // per participant
    std::vector<int> counts;         // per participant
};

struct IndividualEvaluation {
    GenomeId genome_id = kUnassignedId;
    SpeciesId species_id = 0;
    FitnessRecord record;
    double f_focal = 0.0;
    double f_baseline = 0.0;
    double budget_multiplier = 1.0;
    SwarmComposition composition;
    TeamSummary team;
};

IndividualEvaluation evaluate_individual(const Genome& focal, const SpeciesPartition& partition,
                                         const EvaluationPlan& plan, const ScenarioConfig& scenario,
                                         std::uint64_t master_seed, int generation,
                                         std::optional<double> previous_smoothed);

// Evaluates every individual (OpenMP across individuals) and refreshes each
// species' total adjusted fitness. Results are ordered as `population` and
// do not depend on the worker count.
std::vector<IndividualEvaluation> evaluate_generation(const std::vector<Genome>& population,
                                                      SpeciesPartition& partition,
                                                      const FitnessHistory& history,
                                                      const ScenarioConfig& scenario,
                                                      std::uint64_t master_seed, int generation);

// Single-threaded reference of evaluate_generation.
std::vector<IndividualEvaluation> evaluate_generation_serial(const std::vector<Genome>& population,
                                                             SpeciesPartition& partition,
                                                             const FitnessHistory& history,
                                                             const ScenarioConfig& scenario,
                                                             std::uint64_t master_seed,
                                                             int generation);

}  // namespace swarmcode
