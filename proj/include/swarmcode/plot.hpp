#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmcode/evolution.hpp"

namespace swarmcode {

// Everything here reads the generation log only; nothing is re-simulated.

enum class PlotKind : std::uint8_t { SpeciesComposition, TeamComposition, BestFitness, Traits };

const std::vector<PlotKind>& all_plot_kinds();
const char* plot_kind_name(PlotKind k);  // "species", "team", "fitness", "traits"
std::optional<PlotKind> parse_plot_kind(const std::string& name);

// Stacked series: values[s][g] belongs to species[s] at generations[g].
struct StackedSeries {
    std::vector<int> generations;
    std::vector<SpeciesId> species;
    std::vector<std::vector<double>> values;
};

// Members per species per generation.
StackedSeries species_composition(const std::vector<nlohmann::json>& log);

// Best-team robot slots per species per generation.
StackedSeries team_composition(const std::vector<nlohmann::json>& log);

struct FitnessPoint {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
};
std::vector<FitnessPoint> fitness_curve(const std::vector<nlohmann::json>& log);

// One row per species present in the final best team.
struct TraitRow {
    SpeciesId species = 0;
    int team_slots = 0;
    SpeciesTraits traits;
};
std::vector<TraitRow> trait_summary(const std::vector<nlohmann::json>& log);

// Renders one plot kind of run_dir into out_dir (default run_dir/plots) and
// returns the written files. Throws RunError on a missing or empty log.
std::vector<std::filesystem::path> plot(const std::filesystem::path& run_dir, PlotKind kind,
                                        const std::filesystem::path& out_dir = {});

}  // namespace swarmcode
