#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "swarmcode/genome.hpp"

namespace swarmcode {

using SpeciesId = std::uint64_t;

struct DistanceWeights {
    double w_tag = 1.0;
    double w_hw = 0.5;
    double w_bt = 0.3;
    double w_tool = 0.35;
    double w_size = 0.7;
    double gamma = 2.0;
    // Width of the radius gene range; normalizes the size term.
    double radius_span = 0.4;

    void validate() const;
};

struct Species {
    SpeciesId id = 0;
    Genome prototype;
    std::vector<GenomeId> members;
    double total_adjusted_fitness = 0.0;
    int age = 0;
};

struct SpeciesPartition {
    std::vector<Species> species;  // ascending id
    std::map<GenomeId, SpeciesId> assignment;
    SpeciesId next_id = 1;

    const Species* find(SpeciesId id) const;
    Species* find(SpeciesId id);
    SpeciesId species_of(GenomeId g) const { return assignment.at(g); }
};

// (H / L)^gamma, H the Hamming distance.
double tag_distance(const Tag& a, const Tag& b, double gamma);

// Normalized Euclidean distance over tiers and setpoints (radius and tool
// excluded), in [0, 1].
double hardware_distance(const HardwareGenes& a, const HardwareGenes& b);

// Fraction of positions whose opcodes differ.
double behavior_distance(const BehaviorGenes& a, const BehaviorGenes& b);

double compatibility_distance(const Genome& a, const Genome& b, const DistanceWeights& w);

// NEAT-style species assignment. Surviving species re-pick their prototype
// as the population member nearest the previous prototype (in ascending id
// order); everyone else joins the nearest prototype within delta or founds
// a new species. Ties go to the lowest species id.
SpeciesPartition assign_species(std::span<const Genome> population, const SpeciesPartition& previous,
                                double delta, const DistanceWeights& w);

// Species other than the focal's own whose prototype tag lies strictly
// closer than the focal's selectivity. Ascending species id.
std::vector<SpeciesId> select_partners(const Genome& focal, const SpeciesPartition& partition,
                                       double gamma);

}  // namespace swarmcode
