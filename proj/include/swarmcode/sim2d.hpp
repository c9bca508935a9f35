#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "swarmcode/btvm.hpp"
#include "swarmcode/genome.hpp"
#include "swarmcode/rng.hpp"

namespace swarmcode {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm2() const { return x * x + y * y; }
    bool operator==(const Vec2&) const = default;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ArenaConfig {
    double width = 10.0;
    double height = 10.0;
    double base_radius = 1.0;
    int obstacle_count = 3;
    double obstacle_radius_min = 0.3;
    double obstacle_radius_max = 0.6;
};

enum class CollabGrips : std::uint8_t { Suction, Pincher, Mixed };

struct PackageConfig {
    int circle_count = 6;   // individual, suction-compatible
    int square_count = 6;   // individual, pincher-compatible
    int collab_count = 0;
    int grips_min = 2;
    int grips_max = 2;
    CollabGrips collab_grips = CollabGrips::Mixed;
    double radius_min = 0.15;
    double radius_max = 0.25;
    double collab_radius = 0.45;
    double weight_min = 0.5;
    double weight_max = 2.0;
    double collab_weight_min = 2.0;
    double collab_weight_max = 4.0;
    bool distance_weights = false;
    // Packages keep at least this gap from the base edge.
    double base_clearance = 1.0;
};

struct PhysicsConfig {
    double dt = 0.05;
    int ticks = 2000;
    double max_speed = 1.0;
    double kp = 10.0;
    double kd = 10.0;
    double pickup_range = 0.15;
    double restitution = 1.0;
    std::array<double, 3> chassis_density{60.0, 45.0, 30.0};   // kg / m^2
    std::array<double, 3> battery_energy{150.0, 300.0, 600.0};  // J at setpoint 1
    double battery_mass_per_joule = 0.01;                       // kg / J
    std::array<double, 3> motor_force{4.0, 8.0, 16.0};          // N at setpoint 1
    std::array<double, 3> motor_lift{1.0, 2.0, 4.0};            // kg at reference radius
    double lift_reference_radius = 0.3;
    double lift_reserve = 0.2;  // fraction of lift kept for locomotion
    double move_energy = 0.05;  // J per N per s
    double idle_energy = 0.2;   // J per s
    int stuck_window = 30;
    double stuck_fraction = 0.1;
    double diameter_band_min = 0.5;
    double diameter_band_max = 2.0;
    double walk_reach = 0.5;
    int walk_retarget_ticks = 100;
};

enum class PackageShape : std::uint8_t { Circle, Square };
enum class PackageKind : std::uint8_t { Individual, Collaborative };

struct GripPoint {
    Vec2 offset;  // from package center; length = package radius
    EndEffector required = EndEffector::Suction;
    std::optional<std::uint32_t> occupied_by;
};

struct Package {
    std::uint32_t id = 0;
    Vec2 position;
    double radius = 0.2;
    double weight = 1.0;
    PackageShape shape = PackageShape::Circle;
    PackageKind kind = PackageKind::Individual;
    std::vector<GripPoint> grip_points;
    bool delivered = false;
    bool lifted = false;  // collaborative: every grip occupied
    std::optional<std::uint32_t> carrier;  // individual packages
    double initial_base_distance = 0.0;
    bool ever_picked = false;
    bool moved = false;
};

struct Obstacle {
    Vec2 position;
    double radius = 0.5;
};

// Derived physical parameters of one robot design.
struct RobotSpec {
    double radius = 0.3;
    double mass = 1.0;
    double max_force = 1.0;
    double lift_capacity = 0.0;
    double energy_max = 0.0;
    EndEffector end_effector = EndEffector::Suction;
};

RobotSpec robot_spec(const HardwareGenes& hw, const PhysicsConfig& phys);

struct Robot {
    std::uint32_t id = 0;
    GenomeId genome_id = kUnassignedId;
    Vec2 position;
    Vec2 velocity;
    RobotSpec spec;
    double energy = 0.0;
    std::optional<std::uint32_t> held_package;
    std::optional<std::size_t> grip_index;
    const Program* program = nullptr;
    std::vector<Vec2> history;  // ring buffer for the stuck detector
    std::size_t history_head = 0;
    std::size_t history_count = 0;
    Vec2 walk_target;
    int walk_age = 0;
    std::optional<std::uint32_t> random_target;
};

struct World {
    double width = 10.0;
    double height = 10.0;
    Vec2 base;
    double base_radius = 1.0;
    std::vector<Robot> robots;
    std::vector<Package> packages;
    std::vector<Obstacle> obstacles;
    std::vector<Vec2> spawn_points;
    long tick = 0;
    PhysicsConfig physics;
    Rng rng;
    // Running counters.
    int n_delivered = 0;
    int n_collab_delivered = 0;
    int n_picked = 0;
    int n_collab_picked = 0;
    int grip_delivered_sum = 0;
};

struct TrialStats {
    int n_delivered = 0;
    int n_collab_delivered = 0;
    int n_picked = 0;
    int n_collab_picked = 0;
    int grip_delivered_sum = 0;
    double energy_avg_final = 0.0;  // mean remaining charge, fraction of capacity
    std::vector<double> proximity_scores;
    std::vector<double> closeness_progress;

    bool operator==(const TrialStats&) const = default;
};

// Packages, obstacles and spawn points; no robots yet. Deterministic per
// seed. Throws ScenarioError when placement fails.
World generate_environment(const ArenaConfig& arena, const PackageConfig& packages,
                           const PhysicsConfig& physics, int swarm_size, std::uint64_t seed);

// Robot i spawns at spawn_points[i]. Programs must outlive the world.
void insert_robots(World& world, std::span<const Genome* const> genomes,
                   std::span<const Program* const> programs);

// Kp * (target - pos) - Kd * vel, clamped to max_force.
Vec2 pd_control(const Robot& robot, Vec2 target, double kp, double kd);

Observation observe(World& world, std::size_t robot_index);

// One tick: forces, semi-implicit Euler, collisions, pickup/drop, delivery.
void step(World& world, std::span<const TickResult> commands);

// Returns true on success; failure leaves the world unchanged.
bool attempt_pickup(World& world, std::size_t robot_index, std::uint32_t package_id);

TrialStats finalize_stats(const World& world);

// Proximity score of a holding robot at distance d from the base.
inline double proximity_score(double d_base) { return 10.0 / (1.0 + 0.1 * d_base); }

using TrajectorySink = std::function<void(const World&)>;

// Generates the environment for `seed`, inserts the swarm, runs the
// configured number of ticks, and aggregates stats.
TrialStats run_trial(const ArenaConfig& arena, const PackageConfig& packages,
                     const PhysicsConfig& physics, std::span<const Genome* const> swarm,
                     std::uint64_t seed, const TrajectorySink& sink = {});

}  // namespace swarmcode
