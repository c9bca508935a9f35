#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "swarmcode/btvm.hpp"
#include "swarmcode/rng.hpp"

namespace swarmcode {

using GenomeId = std::uint64_t;
inline constexpr GenomeId kUnassignedId = 0;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EndEffector : std::uint8_t { Suction = 0, Pincher = 1 };

struct Tag {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    bool operator==(const Tag&) const = default;
};

struct HardwareGenes {
    double radius = 0.3;
    int chassis_tier = 1;
    int battery_tier = 1;
    int motor_tier = 1;
    EndEffector end_effector = EndEffector::Suction;
    double torque_setpoint = 1.0;
    double battery_setpoint = 1.0;

    bool operator==(const HardwareGenes&) const = default;
};

struct BehaviorGenes {
    std::vector<std::uint8_t> opcodes;

    bool operator==(const BehaviorGenes&) const = default;
};

struct Genome {
    GenomeId id = kUnassignedId;
    Tag tag;
    double selectivity = 0.5;
    double dominance = 0.5;
    BehaviorGenes behavior;
    HardwareGenes hardware;

    // Gene-wise equality, ignoring the id.
    bool same_genes(const Genome& o) const
    {
        return tag == o.tag && selectivity == o.selectivity && dominance == o.dominance &&
               behavior == o.behavior && hardware == o.hardware;
    }
};

struct GenomeConfig {
    int tag_length = 16;
    int bt_length = 24;
    double radius_min = 0.1;
    double radius_max = 0.5;
    double selectivity_init_min = 0.2;
    double selectivity_init_max = 0.8;
    double dominance_init_min = 0.1;
    double dominance_init_max = 0.9;
    double setpoint_init_min = 0.25;
    double setpoint_init_max = 1.0;
    // Probability that each template leaf is replaced by a random leaf.
    double template_leaf_noise = 0.25;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

enum class CrossoverStyle : std::uint8_t { Uniform, Blend };

struct MutationConfig {
    double tag_flip_p = 1.0 / 16.0;
    double selectivity_p = 0.2;
    double selectivity_sigma = 0.1;
    double dominance_p = 0.2;
    double dominance_sigma = 0.1;
    double radius_p = 0.2;
    double radius_sigma = 0.1;  // fraction of [radius_min, radius_max]
    double setpoint_p = 0.2;
    double setpoint_sigma = 0.1;
    double tier_p = 0.1;
    double effector_p = 0.1;
    double bt_p = 0.5;  // chance the behavior tree is altered at all
    double bt_point_fraction = 0.95;
    CrossoverStyle crossover_style = CrossoverStyle::Uniform;

    void validate() const;
};

// The three seed behavior-tree templates (before leaf randomization).
const std::vector<std::vector<std::uint8_t>>& seed_templates();

Genome random_genome(const GenomeConfig& config, Rng& rng);

// Outcome flag exposed for rate tests.
enum class BehaviorMutation : std::uint8_t { None, Point, Subtree };

struct MutationOutcome {
    Genome genome;
    BehaviorMutation behavior = BehaviorMutation::None;
};

MutationOutcome mutate_traced(const Genome& g, const GenomeConfig& config, const MutationConfig& mc,
                              Rng& rng);

// The returned genome carries kUnassignedId; callers assign ids.
Genome mutate(const Genome& g, const GenomeConfig& config, const MutationConfig& mc, Rng& rng);

Genome crossover(const Genome& a, const Genome& b, Rng& rng,
                 CrossoverStyle style = CrossoverStyle::Uniform);

// Throws ConfigError describing the first violated invariant.
void check_invariants(const Genome& g, const GenomeConfig& config);

}  // namespace swarmcode
