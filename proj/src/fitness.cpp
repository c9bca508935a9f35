#include "swarmcode/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace swarmcode {

namespace {

double mean(std::span<const double> xs)
{
    if (xs.empty())
        return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void BudgetModel::validate() const
{
    if (!(budget >= 0.0))
        throw ConfigError("budget.budget: must be >= 0");
    if (!(lambda >= 0.0))
        throw ConfigError("budget.lambda: must be >= 0");
    if (!(floor > 0.0 && floor < 1.0))
        throw ConfigError("budget.floor: must be in (0, 1)");
    if (!(species_fee >= 0.0))
        throw ConfigError("budget.species_fee: must be >= 0");
    for (const auto* table : {&costs.chassis, &costs.motor, &costs.battery})
        for (double c : *table)
            if (!(c >= 0.0))
                throw ConfigError("budget.costs: tier costs must be >= 0");
    if (!(costs.suction >= 0.0 && costs.pincher >= 0.0 && costs.per_meter_radius >= 0.0))
        throw ConfigError("budget.costs: effector and radius costs must be >= 0");
}

FitnessTerms fitness_terms(const TrialStats& s, const FitnessWeights& w)
{
    FitnessTerms t;
    t.delivery = s.n_delivered * w.delivery;
    t.collab = s.grip_delivered_sum * w.delivery + s.n_collab_delivered * w.collab_bonus;
    t.pickup = (s.n_picked + s.n_collab_picked) * w.pickup;
    // Remaining charge in percent of capacity.
    t.energy = 100.0 * s.energy_avg_final * w.energy;
    t.proximity = mean(s.proximity_scores) * w.proximity;
    t.closeness = mean(s.closeness_progress) * w.closeness;
    // Retrieval means delivery; pickups alone do not lift the penalty.
    t.activity = (s.n_delivered + s.n_collab_delivered) == 0 ? 0.5 : 1.0;
    return t;
}

double raw_fitness(const TrialStats& stats, const FitnessWeights& w)
{
    const FitnessTerms t = fitness_terms(stats, w);
    return std::max(t.sum() * t.activity, 0.1);
}

double unit_cost(const HardwareGenes& hw, const CostTable& c)
{
    const auto tier = [](int t) { return static_cast<std::size_t>(std::clamp(t, 1, 3) - 1); };
    return c.chassis[tier(hw.chassis_tier)] + c.motor[tier(hw.motor_tier)] +
           c.battery[tier(hw.battery_tier)] +
           (hw.end_effector == EndEffector::Suction ? c.suction : c.pincher) +
           c.per_meter_radius * hw.radius;
}

double swarm_cost(std::span<const std::pair<const Genome*, int>> composition, int species_count,
                  const BudgetModel& b)
{
    double total = 0.0;
    for (const auto& [g, count] : composition)
        total += count * unit_cost(g->hardware, b.costs);
    return total + species_count * b.species_fee;
}

double budget_penalty(double swarm_cost, const BudgetModel& b)
{
    const double excess = swarm_cost - b.budget;
    if (!(excess > 0.0))
        return 1.0;
    return std::max(b.floor, std::exp(-b.lambda * excess));
}

double gated_fitness(double f_focal, double f_baseline, double base_fitness, double p_marginal)
{
    return f_focal - f_baseline > 0.0 ? base_fitness : base_fitness * p_marginal;
}

double ema_smooth(std::optional<double> previous, double value, double alpha)
{
    if (!previous)
        return value;
    return alpha * *previous + (1.0 - alpha) * value;
}

double roi_fitness(double fitness, double swarm_cost)
{
    return fitness / std::max(swarm_cost, 1.0);
}

}  // namespace swarmcode
