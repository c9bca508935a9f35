#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <utility>

#include "swarmcode/genome.hpp"
#include "swarmcode/sim2d.hpp"

namespace swarmcode {

struct FitnessWeights {
    double delivery = 100.0;
    double collab_bonus = 50.0;
    double pickup = 1.0;
    double energy = 0.03;
    double proximity = 1.0;
    double closeness = 30.0;
};

struct CostTable {
    std::array<double, 3> chassis{50.0, 100.0, 200.0};
    std::array<double, 3> motor{40.0, 90.0, 180.0};
    std::array<double, 3> battery{30.0, 70.0, 150.0};
    double suction = 20.0;
    double pincher = 35.0;
    double per_meter_radius = 100.0;
};

struct BudgetModel {
    double budget = std::numeric_limits<double>::infinity();
    double lambda = 0.001;
    double floor = 0.05;
    double species_fee = 0.0;
    CostTable costs;

    void validate() const;
};

// The six weighted score terms before the activity penalty.
struct FitnessTerms {
    double delivery = 0.0;
    double collab = 0.0;
    double pickup = 0.0;
    double energy = 0.0;
    double proximity = 0.0;
    double closeness = 0.0;
    double activity = 1.0;

    double sum() const { return delivery + collab + pickup + energy + proximity + closeness; }
};

FitnessTerms fitness_terms(const TrialStats& stats, const FitnessWeights& w);

// max(sum of terms * P_activity, 0.1).
double raw_fitness(const TrialStats& stats, const FitnessWeights& w);

double unit_cost(const HardwareGenes& hw, const CostTable& costs);

double swarm_cost(std::span<const std::pair<const Genome*, int>> composition, int species_count,
                  const BudgetModel& b);

// 1 within budget, else max(floor, exp(-lambda * overshoot)).
double budget_penalty(double swarm_cost, const BudgetModel& b);

// base_fitness when F_focal - F_baseline > 0, else base_fitness * p_marginal.
double gated_fitness(double f_focal, double f_baseline, double base_fitness, double p_marginal);

// alpha weights the history: alpha * previous + (1 - alpha) * value.
double ema_smooth(std::optional<double> previous, double value, double alpha);

double roi_fitness(double fitness, double swarm_cost);

struct FitnessRecord {
    double raw = 0.0;       // F_focal * P_budget (or ROI)
    double smoothed = 0.0;  // EMA of the gated value
    double marginal = 0.0;  // F_focal - F_baseline
    bool gated = false;
};

}  // namespace swarmcode
