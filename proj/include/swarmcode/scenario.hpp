#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmcode/fitness.hpp"
#include "swarmcode/genome.hpp"
#include "swarmcode/sim2d.hpp"
#include "swarmcode/speciation.hpp"

namespace swarmcode {

enum class Objective : std::uint8_t { Fitness, Roi };

struct EvaluationConfig {
    int n_trials = 3;
    double p_marginal = 0.25;
    double alpha = 0.6;
    bool fitness_sharing = true;
};

struct EvolutionConfig {
    int population_size = 50;
    int elite_cap = 3;
    int tournament_size = 3;
    int max_partner_retries = 5;
    double intra_crossover_p = 0.7;
    double inter_crossover_p = 0.025;
    double delta = 0.4;
};

struct ScenarioConfig {
    std::string name = "default";
    ArenaConfig arena;
    PackageConfig packages;
    PhysicsConfig physics;
    int swarm_size = 20;
    int generations = 500;
    std::uint64_t seed = 1;
    Objective objective = Objective::Fitness;
    int checkpoint_interval = 25;
    GenomeConfig genome;
    MutationConfig mutation;
    DistanceWeights distance;
    FitnessWeights fitness;
    BudgetModel budget;
    EvaluationConfig evaluation;
    EvolutionConfig evolution;
};

// Distance weights with the size term normalized by the genome's radius range.
inline DistanceWeights effective_distance(const ScenarioConfig& s)
{
    DistanceWeights w = s.distance;
    w.radius_span = s.genome.radius_max - s.genome.radius_min;
    return w;
}

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string path;  // e.g. "genome.radius_min"
    std::string message;
};

// Parses a scenario document. Omitted keys keep their defaults; unknown
// keys and type mismatches are reported as errors.
ScenarioConfig scenario_from_json(const nlohmann::json& j, std::vector<Diagnostic>& diagnostics);

nlohmann::json scenario_to_json(const ScenarioConfig& s);

// Bound and feasibility checks on a parsed scenario.
std::vector<Diagnostic> validate_scenario(const ScenarioConfig& s);

// Parse + validate. Throws ConfigError listing every error diagnostic.
ScenarioConfig load_scenario(const std::filesystem::path& path);

bool has_errors(const std::vector<Diagnostic>& d);
std::string format_diagnostics(const std::vector<Diagnostic>& d);

}  // namespace swarmcode
