#include "swarmcode/speciation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarmcode {

void DistanceWeights::validate() const
{
    const std::pair<double, const char*> fields[] = {
        {w_tag, "distance.w_tag"}, {w_hw, "distance.w_hw"},     {w_bt, "distance.w_bt"},
        {w_tool, "distance.w_tool"}, {w_size, "distance.w_size"}, {gamma, "distance.gamma"},
    };
    for (auto [v, name] : fields)
        if (!(v >= 0.0))
            throw ConfigError(std::string(name) + ": must be non-negative");
    if (!(radius_span > 0.0))
        throw ConfigError("distance.radius_span: must be > 0");
}

const Species* SpeciesPartition::find(SpeciesId id) const
{
    auto it = std::lower_bound(species.begin(), species.end(), id,
                               [](const Species& s, SpeciesId v) { return s.id < v; });
    return it != species.end() && it->id == id ? &*it : nullptr;
}

Species* SpeciesPartition::find(SpeciesId id)
{
    return const_cast<Species*>(std::as_const(*this).find(id));
}

double tag_distance(const Tag& a, const Tag& b, double gamma)
{
    if (a.size() != b.size())
        throw ShapeError("tag_distance: tag lengths differ");
    if (a.size() == 0)
        return 0.0;
    std::size_t h = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        h += a.bits[i] != b.bits[i];
    return std::pow(static_cast<double>(h) / static_cast<double>(a.size()), gamma);
}

double hardware_distance(const HardwareGenes& a, const HardwareGenes& b)
{
    const double d[] = {
        (a.chassis_tier - b.chassis_tier) / 2.0,
        (a.battery_tier - b.battery_tier) / 2.0,
        (a.motor_tier - b.motor_tier) / 2.0,
        a.torque_setpoint - b.torque_setpoint,
        a.battery_setpoint - b.battery_setpoint,
    };
    double sq = 0.0;
    for (double x : d)
        sq += x * x;
    return std::sqrt(sq / 5.0);
}

double behavior_distance(const BehaviorGenes& a, const BehaviorGenes& b)
{
    if (a.opcodes.size() != b.opcodes.size())
        throw ShapeError("behavior_distance: behavior-tree lengths differ");
    if (a.opcodes.empty())
        return 0.0;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.opcodes.size(); ++i)
        diff += a.opcodes[i] != b.opcodes[i];
    return static_cast<double>(diff) / static_cast<double>(a.opcodes.size());
}

double compatibility_distance(const Genome& a, const Genome& b, const DistanceWeights& w)
{
    const double d_tool = a.hardware.end_effector != b.hardware.end_effector ? 1.0 : 0.0;
    const double d_size = std::abs(a.hardware.radius - b.hardware.radius) / w.radius_span;
    return w.w_tag * tag_distance(a.tag, b.tag, w.gamma) +
           w.w_hw * hardware_distance(a.hardware, b.hardware) +
           w.w_bt * behavior_distance(a.behavior, b.behavior) + w.w_tool * d_tool +
           w.w_size * d_size;
}

SpeciesPartition assign_species(std::span<const Genome> population, const SpeciesPartition& previous,
                                double delta, const DistanceWeights& w)
{
    SpeciesPartition out;
    out.next_id = previous.next_id;
    std::vector<bool> claimed(population.size(), false);
    std::size_t remaining = population.size();

    // Carry surviving lineages forward.
    for (const auto& old : previous.species) {
        if (remaining == 0)
            break;
        std::size_t best = population.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < population.size(); ++i) {
            if (claimed[i])
                continue;
            const double d = compatibility_distance(population[i], old.prototype, w);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        claimed[best] = true;
        --remaining;
        Species s;
        s.id = old.id;
        s.prototype = population[best];
        s.members.push_back(population[best].id);
        s.age = old.age + 1;
        out.species.push_back(std::move(s));
    }

    // Everyone else: nearest prototype within delta, or found a species.
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (claimed[i])
            continue;
        Species* target = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto& s : out.species) {
            const double d = compatibility_distance(population[i], s.prototype, w);
            if (d < best_d || (d == best_d && target && s.id < target->id)) {
                best_d = d;
                target = &s;
            }
        }
        if (target && best_d <= delta) {
            target->members.push_back(population[i].id);
        } else {
            Species s;
            s.id = out.next_id++;
            s.prototype = population[i];
            s.members.push_back(population[i].id);
            out.species.push_back(std::move(s));
        }
    }

    std::erase_if(out.species, [](const Species& s) { return s.members.empty(); });
    std::sort(out.species.begin(), out.species.end(),
              [](const Species& a, const Species& b) { return a.id < b.id; });
    for (const auto& s : out.species)
        for (auto g : s.members)
            out.assignment[g] = s.id;
    return out;
}

std::vector<SpeciesId> select_partners(const Genome& focal, const SpeciesPartition& partition,
                                       double gamma)
{
    std::vector<SpeciesId> out;
    const auto own = partition.assignment.find(focal.id);
    for (const auto& s : partition.species) {
        if (own != partition.assignment.end() && own->second == s.id)
            continue;
        if (tag_distance(focal.tag, s.prototype.tag, gamma) < focal.selectivity)
            out.push_back(s.id);
    }
    return out;
}

}  // namespace swarmcode
