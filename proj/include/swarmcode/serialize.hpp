#pragma once

#include <json.hpp>

#include "swarmcode/evolution.hpp"
#include "swarmcode/genome.hpp"
#include "swarmcode/sim2d.hpp"
#include "swarmcode/speciation.hpp"

namespace swarmcode {

// JSON forms used by checkpoints and run logs. Doubles are written in
// shortest round-trip form, so from_json(to_json(x)) == x exactly.

nlohmann::json genome_to_json(const Genome& g);
Genome genome_from_json(const nlohmann::json& j);

nlohmann::json partition_to_json(const SpeciesPartition& p);
SpeciesPartition partition_from_json(const nlohmann::json& j);

nlohmann::json best_team_to_json(const BestTeam& b);
BestTeam best_team_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const EvolutionState& s);
EvolutionState state_from_json(const nlohmann::json& j);

// One generation log record. Wall time is deliberately left out so logs
// are comparable byte for byte.
nlohmann::json report_to_json(const GenerationReport& r);

// One trajectory record: robot poses and package states at the current tick.
nlohmann::json world_snapshot(const World& w);

}  // namespace swarmcode
