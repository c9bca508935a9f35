#include "swarmcode/sim2d.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace swarmcode {

namespace {

constexpr double kSpawnSpacing = 1.1;  // > 2 * largest robot radius
constexpr int kPlacementRetries = 10000;

bool compatible(EndEffector e, PackageShape s)
{
    return (e == EndEffector::Suction) == (s == PackageShape::Circle);
}

Vec2 unit(Vec2 v)
{
    const double n = v.norm();
    return n > 0.0 ? v * (1.0 / n) : Vec2{1.0, 0.0};
}

double effective_mass(const World& w, const Robot& r)
{
    if (r.held_package && !r.grip_index)
        return r.spec.mass + w.packages[*r.held_package].weight;
    return r.spec.mass;
}

// Where a robot's center sits when holding grip `g`.
Vec2 grip_station(const Package& p, const GripPoint& g, double robot_radius)
{
    return p.position + g.offset + unit(g.offset) * robot_radius;
}

bool individual_pickable(const Package& p, const Robot& r, const PhysicsConfig& phys)
{
    if (p.delivered || p.carrier || p.kind != PackageKind::Individual)
        return false;
    if (!compatible(r.spec.end_effector, p.shape))
        return false;
    if (r.spec.lift_capacity < p.weight)
        return false;
    const double ratio = r.spec.radius / p.radius;
    return ratio >= phys.diameter_band_min && ratio <= phys.diameter_band_max;
}

// Nearest free grip matching the robot's effector; returns grip index and
// the gap from the robot's edge to the grip point.
std::optional<std::pair<std::size_t, double>> nearest_free_grip(const Package& p, const Robot& r)
{
    if (p.delivered || p.kind != PackageKind::Collaborative || p.lifted)
        return std::nullopt;
    std::optional<std::pair<std::size_t, double>> best;
    for (std::size_t g = 0; g < p.grip_points.size(); ++g) {
        const auto& gp = p.grip_points[g];
        if (gp.occupied_by || gp.required != r.spec.end_effector)
            continue;
        const double gap = (p.position + gp.offset - r.position).norm() - r.spec.radius;
        if (!best || gap < best->second)
            best = std::make_pair(g, gap);
    }
    return best;
}

// Gap to the package if the robot could pick it up, otherwise nullopt.
std::optional<double> reach_gap(const World& w, const Package& p, const Robot& r)
{
    if (p.kind == PackageKind::Individual) {
        if (!individual_pickable(p, r, w.physics))
            return std::nullopt;
        return (p.position - r.position).norm() - r.spec.radius - p.radius;
    }
    auto g = nearest_free_grip(p, r);
    if (!g)
        return std::nullopt;
    return g->second;
}

Vec2 approach_point(const Package& p, const Robot& r)
{
    if (p.kind == PackageKind::Individual)
        return p.position;
    auto g = nearest_free_grip(p, r);
    if (!g)
        return p.position;
    return grip_station(p, p.grip_points[g->first], r.spec.radius);
}

void release(World& w, Robot& r)
{
    if (!r.held_package)
        return;
    auto& p = w.packages[*r.held_package];
    if (r.grip_index) {
        p.grip_points[*r.grip_index].occupied_by.reset();
        p.lifted = false;
    } else {
        p.carrier.reset();
        p.position = r.position;
    }
    r.held_package.reset();
    r.grip_index.reset();
}

void drain(Robot& r, double force, const PhysicsConfig& phys)
{
    r.energy = std::max(0.0, r.energy - (phys.move_energy * force + phys.idle_energy) * phys.dt);
}

Vec2 clamp_speed(Vec2 v, double max_speed)
{
    const double s = v.norm();
    return s > max_speed ? v * (max_speed / s) : v;
}

Vec2 command_target(World& w, Robot& r, const TickResult& cmd, bool& has_target)
{
    has_target = false;
    if (!cmd.action)
        return r.position;
    switch (*cmd.action) {
    case ActionKind::MoveToPackage:
    case ActionKind::MoveToRandomPackage:
        if (!cmd.target || *cmd.target >= w.packages.size())
            return r.position;
        has_target = true;
        return approach_point(w.packages[*cmd.target], r);
    case ActionKind::MoveToBase:
        has_target = true;
        return w.base;
    case ActionKind::RandomWalk:
        if (r.walk_age <= 0 || (r.walk_target - r.position).norm() < w.physics.walk_reach) {
            r.walk_target = {w.rng.uniform(0.0, w.width), w.rng.uniform(0.0, w.height)};
            r.walk_age = w.physics.walk_retarget_ticks;
        }
        --r.walk_age;
        has_target = true;
        return r.walk_target;
    case ActionKind::PickUp:
    case ActionKind::Drop:
        return r.position;
    }
    return r.position;
}

void resolve_robot_pair(World& w, Robot& a, Robot& b)
{
    Vec2 d = b.position - a.position;
    const double min_d = a.spec.radius + b.spec.radius;
    const double dist2 = d.norm2();
    if (dist2 >= min_d * min_d)
        return;
    const double dist = std::sqrt(dist2);
    const Vec2 n = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
    const double inv_a = 1.0 / effective_mass(w, a);
    const double inv_b = 1.0 / effective_mass(w, b);
    const double vrel = (b.velocity - a.velocity).dot(n);
    if (vrel < 0.0) {
        const double j = -(1.0 + w.physics.restitution) * vrel / (inv_a + inv_b);
        a.velocity -= n * (j * inv_a);
        b.velocity += n * (j * inv_b);
    }
    const double overlap = min_d - dist;
    a.position -= n * (overlap * inv_a / (inv_a + inv_b));
    b.position += n * (overlap * inv_b / (inv_a + inv_b));
}

void resolve_static(World& w, Robot& r)
{
    const double e = w.physics.restitution;
    for (const auto& o : w.obstacles) {
        const Vec2 d = r.position - o.position;
        const double min_d = r.spec.radius + o.radius;
        if (d.norm2() >= min_d * min_d)
            continue;
        const Vec2 n = unit(d);
        const double vn = r.velocity.dot(n);
        if (vn < 0.0)
            r.velocity -= n * ((1.0 + e) * vn);
        r.position = o.position + n * min_d;
    }
    const double rad = r.spec.radius;
    if (r.position.x < rad) {
        r.position.x = rad;
        if (r.velocity.x < 0.0) r.velocity.x = -e * r.velocity.x;
    } else if (r.position.x > w.width - rad) {
        r.position.x = w.width - rad;
        if (r.velocity.x > 0.0) r.velocity.x = -e * r.velocity.x;
    }
    if (r.position.y < rad) {
        r.position.y = rad;
        if (r.velocity.y < 0.0) r.velocity.y = -e * r.velocity.y;
    } else if (r.position.y > w.height - rad) {
        r.position.y = w.height - rad;
        if (r.velocity.y > 0.0) r.velocity.y = -e * r.velocity.y;
    }
}

void move_collaborative(World& w, Package& p, std::span<const Vec2> forces)
{
    const auto& phys = w.physics;
    if (!p.lifted) {
        for (const auto& gp : p.grip_points) {
            if (!gp.occupied_by)
                continue;
            auto& r = w.robots[*gp.occupied_by];
            r.velocity = {};
            drain(r, 0.0, phys);
        }
        return;
    }
    // Package velocity: mean of the carriers' intended velocities, slowed
    // when their combined lift falls short of the weight.
    const Vec2 v_pkg = w.robots[*p.grip_points.front().occupied_by].velocity;
    Vec2 sum{};
    double capacity = 0.0;
    for (const auto& gp : p.grip_points) {
        const auto& r = w.robots[*gp.occupied_by];
        const Vec2 f = forces[r.id];
        sum += clamp_speed(v_pkg + f * (phys.dt / r.spec.mass), phys.max_speed);
        capacity += r.spec.lift_capacity;
    }
    const double factor = std::min(1.0, capacity / p.weight);
    const Vec2 v = clamp_speed(sum * (factor / static_cast<double>(p.grip_points.size())), phys.max_speed);
    const Vec2 before = p.position;
    p.position += v * phys.dt;
    p.position.x = std::clamp(p.position.x, p.radius, w.width - p.radius);
    p.position.y = std::clamp(p.position.y, p.radius, w.height - p.radius);
    if (!(p.position == before))
        p.moved = true;
    for (const auto& gp : p.grip_points) {
        auto& r = w.robots[*gp.occupied_by];
        r.position = grip_station(p, gp, r.spec.radius);
        r.velocity = v;
        drain(r, forces[r.id].norm(), phys);
    }
}

}  // namespace

RobotSpec robot_spec(const HardwareGenes& hw, const PhysicsConfig& phys)
{
    RobotSpec s;
    const auto tier = [](int t) { return static_cast<std::size_t>(std::clamp(t, 1, 3) - 1); };
    s.radius = hw.radius;
    s.end_effector = hw.end_effector;
    s.energy_max = phys.battery_energy[tier(hw.battery_tier)] * hw.battery_setpoint;
    s.mass = phys.chassis_density[tier(hw.chassis_tier)] * std::numbers::pi * hw.radius * hw.radius +
             phys.battery_mass_per_joule * s.energy_max;
    s.max_force = phys.motor_force[tier(hw.motor_tier)] * hw.torque_setpoint;
    s.lift_capacity = phys.motor_lift[tier(hw.motor_tier)] * hw.torque_setpoint *
                      (hw.radius / phys.lift_reference_radius) * (1.0 - phys.lift_reserve);
    return s;
}

World generate_environment(const ArenaConfig& arena, const PackageConfig& pc,
                           const PhysicsConfig& physics, int swarm_size, std::uint64_t seed)
{
    World w;
    w.width = arena.width;
    w.height = arena.height;
    w.base = {arena.width / 2.0, arena.height / 2.0};
    w.base_radius = arena.base_radius;
    w.physics = physics;
    w.rng = Rng(seed);
    Rng& rng = w.rng;

    // Spawn rings around the base.
    double ring_outer = arena.base_radius;
    for (int k = 0, placed = 0; placed < swarm_size; ++k) {
        const double rr = arena.base_radius + kSpawnSpacing * (k + 0.5);
        const int capacity = std::max(1, static_cast<int>(2.0 * std::numbers::pi * rr / kSpawnSpacing));
        const int count = std::min(capacity, swarm_size - placed);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int i = 0; i < count; ++i) {
            const double a = phase + 2.0 * std::numbers::pi * i / count;
            const Vec2 p = w.base + Vec2{std::cos(a), std::sin(a)} * rr;
            if (p.x < kSpawnSpacing / 2 || p.y < kSpawnSpacing / 2 ||
                p.x > w.width - kSpawnSpacing / 2 || p.y > w.height - kSpawnSpacing / 2)
                throw ScenarioError("generate_environment: swarm does not fit the arena");
            w.spawn_points.push_back(p);
        }
        placed += count;
        ring_outer = rr + kSpawnSpacing / 2;
    }

    for (int i = 0; i < arena.obstacle_count; ++i) {
        bool ok = false;
        for (int t = 0; t < kPlacementRetries && !ok; ++t) {
            Obstacle o;
            o.radius = rng.uniform(arena.obstacle_radius_min, arena.obstacle_radius_max);
            const double margin = o.radius + 0.5;
            if (w.width <= 2 * margin || w.height <= 2 * margin)
                break;
            o.position = {rng.uniform(margin, w.width - margin), rng.uniform(margin, w.height - margin)};
            ok = (o.position - w.base).norm() >= ring_outer + o.radius;
            for (const auto& q : w.obstacles)
                ok = ok && (o.position - q.position).norm() >= o.radius + q.radius + 1.0;
            if (ok)
                w.obstacles.push_back(o);
        }
        if (!ok)
            throw ScenarioError("generate_environment: cannot place obstacles");
    }

    const double d_max = (Vec2{w.width, w.height} * 0.5).norm();
    auto weight_at = [&](double d, double lo, double hi) {
        if (pc.distance_weights) {
            const double f = std::clamp(d / d_max, 0.0, 1.0);
            return hi * (1.0 - f) + lo * f;
        }
        return rng.uniform(lo, hi);
    };
    auto place = [&](Package& p) {
        for (int t = 0; t < kPlacementRetries; ++t) {
            const double margin = p.radius + 0.2;
            p.position = {rng.uniform(margin, w.width - margin), rng.uniform(margin, w.height - margin)};
            bool ok = (p.position - w.base).norm() >= w.base_radius + pc.base_clearance + p.radius;
            for (const auto& o : w.obstacles)
                ok = ok && (p.position - o.position).norm() >= o.radius + p.radius + 0.6;
            for (const auto& q : w.packages)
                ok = ok && (p.position - q.position).norm() >= q.radius + p.radius + 0.2;
            if (ok) {
                p.initial_base_distance = (p.position - w.base).norm();
                return;
            }
        }
        throw ScenarioError("generate_environment: cannot place packages");
    };

    auto add_individual = [&](PackageShape shape) {
        Package p;
        p.id = static_cast<std::uint32_t>(w.packages.size());
        p.kind = PackageKind::Individual;
        p.shape = shape;
        p.radius = rng.uniform(pc.radius_min, pc.radius_max);
        place(p);
        p.weight = weight_at(p.initial_base_distance, pc.weight_min, pc.weight_max);
        p.grip_points.push_back({Vec2{}, shape == PackageShape::Circle ? EndEffector::Suction
                                                                        : EndEffector::Pincher, {}});
        w.packages.push_back(std::move(p));
    };
    for (int i = 0; i < pc.circle_count; ++i)
        add_individual(PackageShape::Circle);
    for (int i = 0; i < pc.square_count; ++i)
        add_individual(PackageShape::Square);

    for (int i = 0; i < pc.collab_count; ++i) {
        Package p;
        p.id = static_cast<std::uint32_t>(w.packages.size());
        p.kind = PackageKind::Collaborative;
        p.radius = pc.collab_radius;
        const int grips = rng.uniform_int(pc.grips_min, pc.grips_max);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const bool start_pincher = rng.bernoulli(0.5);
        for (int g = 0; g < grips; ++g) {
            const double a = phase + 2.0 * std::numbers::pi * g / grips;
            EndEffector req = EndEffector::Suction;
            if (pc.collab_grips == CollabGrips::Pincher)
                req = EndEffector::Pincher;
            else if (pc.collab_grips == CollabGrips::Mixed)
                req = ((g % 2 == 0) == start_pincher) ? EndEffector::Pincher : EndEffector::Suction;
            p.grip_points.push_back({Vec2{std::cos(a), std::sin(a)} * p.radius, req, {}});
        }
        p.shape = p.grip_points.front().required == EndEffector::Suction ? PackageShape::Circle
                                                                         : PackageShape::Square;
        place(p);
        p.weight = weight_at(p.initial_base_distance, pc.collab_weight_min, pc.collab_weight_max);
        w.packages.push_back(std::move(p));
    }
    return w;
}

void insert_robots(World& world, std::span<const Genome* const> genomes,
                   std::span<const Program* const> programs)
{
    if (genomes.size() > world.spawn_points.size())
        throw ScenarioError("insert_robots: more robots than spawn points");
    world.robots.clear();
    world.robots.reserve(genomes.size());
    const auto window = static_cast<std::size_t>(std::max(1, world.physics.stuck_window));
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        Robot r;
        r.id = static_cast<std::uint32_t>(i);
        r.genome_id = genomes[i]->id;
        r.spec = robot_spec(genomes[i]->hardware, world.physics);
        r.position = world.spawn_points[i];
        r.energy = r.spec.energy_max;
        r.program = programs[i];
        r.history.assign(window, r.position);
        r.walk_target = r.position;
        world.robots.push_back(std::move(r));
    }
}

Vec2 pd_control(const Robot& robot, Vec2 target, double kp, double kd)
{
    const Vec2 f = (target - robot.position) * kp - robot.velocity * kd;
    const double mag = f.norm();
    if (mag > robot.spec.max_force)
        return f * (robot.spec.max_force / mag);
    return f;
}

Observation observe(World& w, std::size_t robot_index)
{
    Robot& r = w.robots[robot_index];
    Observation obs;
    obs.has_package = r.held_package.has_value();
    obs.near_base = (r.position - w.base).norm() <= w.base_radius;
    if (r.history_count >= r.history.size()) {
        const Vec2 oldest = r.history[r.history_head];
        obs.am_i_stuck = (r.position - oldest).norm() < w.physics.stuck_fraction * r.spec.radius;
    }
    if (obs.has_package)
        return obs;  // a holding robot cannot pick anything else up

    double best_gap = std::numeric_limits<double>::infinity();
    bool random_valid = false;
    std::size_t reachable = 0;
    for (const auto& p : w.packages) {
        auto gap = reach_gap(w, p, r);
        if (!gap)
            continue;
        ++reachable;
        if (*gap < best_gap) {
            best_gap = *gap;
            obs.nearest_package_id = p.id;
        }
        if (r.random_target && *r.random_target == p.id)
            random_valid = true;
    }
    obs.near_package = obs.nearest_package_id && best_gap <= w.physics.pickup_range;

    if (!random_valid) {
        r.random_target.reset();
        if (reachable > 0) {
            std::size_t k = w.rng.index(reachable);
            for (const auto& p : w.packages) {
                if (!reach_gap(w, p, r))
                    continue;
                if (k-- == 0) {
                    r.random_target = p.id;
                    break;
                }
            }
        }
    }
    obs.random_package_id = r.random_target;
    return obs;
}

bool attempt_pickup(World& w, std::size_t robot_index, std::uint32_t package_id)
{
    Robot& r = w.robots[robot_index];
    if (r.held_package || package_id >= w.packages.size())
        return false;
    Package& p = w.packages[package_id];
    const double range = w.physics.pickup_range;

    if (p.kind == PackageKind::Individual) {
        if (!individual_pickable(p, r, w.physics))
            return false;
        if ((p.position - r.position).norm() - r.spec.radius - p.radius > range)
            return false;
        p.carrier = r.id;
        r.held_package = p.id;
        if (!p.ever_picked) {
            p.ever_picked = true;
            ++w.n_picked;
        }
        return true;
    }

    auto grip = nearest_free_grip(p, r);
    if (!grip || grip->second > range)
        return false;
    auto& gp = p.grip_points[grip->first];
    gp.occupied_by = r.id;
    r.held_package = p.id;
    r.grip_index = grip->first;
    r.position = grip_station(p, gp, r.spec.radius);
    r.velocity = {};
    const bool all = std::all_of(p.grip_points.begin(), p.grip_points.end(),
                                 [](const GripPoint& g) { return g.occupied_by.has_value(); });
    if (all) {
        p.lifted = true;
        if (!p.ever_picked) {
            p.ever_picked = true;
            ++w.n_collab_picked;
        }
    }
    return true;
}

void step(World& w, std::span<const TickResult> commands)
{
    const auto& phys = w.physics;
    const std::size_t n = w.robots.size();
    std::vector<Vec2> forces(n);

    for (std::size_t i = 0; i < n; ++i) {
        Robot& r = w.robots[i];
        if (r.energy <= 0.0)
            continue;
        bool has_target = false;
        const Vec2 target = command_target(w, r, commands[i], has_target);
        // No movement command: brake.
        forces[i] = has_target ? pd_control(r, target, phys.kp, phys.kd)
                               : pd_control(r, r.position, 0.0, phys.kd);
    }

    // Semi-implicit Euler for free robots.
    for (std::size_t i = 0; i < n; ++i) {
        Robot& r = w.robots[i];
        if (r.grip_index)
            continue;
        const double m = effective_mass(w, r);
        r.velocity = clamp_speed(r.velocity + forces[i] * (phys.dt / m), phys.max_speed);
        r.position += r.velocity * phys.dt;
        drain(r, forces[i].norm(), phys);
    }
    for (auto& p : w.packages)
        if (p.kind == PackageKind::Collaborative && !p.delivered)
            move_collaborative(w, p, forces);

    for (std::size_t i = 0; i < n; ++i) {
        if (w.robots[i].grip_index)
            continue;
        for (std::size_t j = i + 1; j < n; ++j)
            if (!w.robots[j].grip_index)
                resolve_robot_pair(w, w.robots[i], w.robots[j]);
    }
    for (auto& r : w.robots)
        if (!r.grip_index)
            resolve_static(w, r);

    // Carried individual packages ride on their robot.
    for (auto& r : w.robots) {
        if (r.held_package && !r.grip_index) {
            auto& p = w.packages[*r.held_package];
            if (!(p.position == r.position)) {
                p.position = r.position;
                p.moved = true;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& cmd = commands[i];
        if (!cmd.action)
            continue;
        if (*cmd.action == ActionKind::PickUp && cmd.target)
            attempt_pickup(w, i, *cmd.target);
        else if (*cmd.action == ActionKind::Drop)
            release(w, w.robots[i]);
    }

    // Delivery.
    for (auto& r : w.robots) {
        if (!r.held_package || r.grip_index)
            continue;
        auto& p = w.packages[*r.held_package];
        if ((r.position - w.base).norm() <= w.base_radius) {
            p.delivered = true;
            p.carrier.reset();
            r.held_package.reset();
            ++w.n_delivered;
        }
    }
    for (auto& p : w.packages) {
        if (p.kind != PackageKind::Collaborative || !p.lifted || p.delivered)
            continue;
        if ((p.position - w.base).norm() <= w.base_radius) {
            p.delivered = true;
            p.lifted = false;
            for (auto& gp : p.grip_points) {
                auto& r = w.robots[*gp.occupied_by];
                r.held_package.reset();
                r.grip_index.reset();
                gp.occupied_by.reset();
            }
            ++w.n_collab_delivered;
            w.grip_delivered_sum += static_cast<int>(p.grip_points.size());
        }
    }

    for (auto& r : w.robots) {
        r.history[r.history_head] = r.position;
        r.history_head = (r.history_head + 1) % r.history.size();
        r.history_count = std::min(r.history_count + 1, r.history.size() + 1);
    }
    ++w.tick;
}

TrialStats finalize_stats(const World& w)
{
    TrialStats s;
    s.n_delivered = w.n_delivered;
    s.n_collab_delivered = w.n_collab_delivered;
    s.n_picked = w.n_picked;
    s.n_collab_picked = w.n_collab_picked;
    s.grip_delivered_sum = w.grip_delivered_sum;
    double e = 0.0;
    for (const auto& r : w.robots) {
        e += r.spec.energy_max > 0.0 ? r.energy / r.spec.energy_max : 0.0;
        s.proximity_scores.push_back(r.held_package ? proximity_score((r.position - w.base).norm()) : 0.0);
    }
    s.energy_avg_final = w.robots.empty() ? 0.0 : e / static_cast<double>(w.robots.size());
    for (const auto& p : w.packages) {
        if (p.delivered || !p.moved)
            continue;
        const double d_final = (p.position - w.base).norm();
        s.closeness_progress.push_back((p.initial_base_distance - d_final) / p.initial_base_distance);
    }
    return s;
}

TrialStats run_trial(const ArenaConfig& arena, const PackageConfig& packages,
                     const PhysicsConfig& physics, std::span<const Genome* const> swarm,
                     std::uint64_t seed, const TrajectorySink& sink)
{
    World w = generate_environment(arena, packages, physics, static_cast<int>(swarm.size()), seed);
    std::vector<Program> programs;
    programs.reserve(swarm.size());
    std::vector<const Program*> program_ptrs;
    for (const Genome* g : swarm)
        programs.push_back(compile(g->behavior.opcodes));
    for (const auto& p : programs)
        program_ptrs.push_back(&p);
    insert_robots(w, swarm, program_ptrs);

    std::vector<TickResult> commands(swarm.size());
    if (sink)
        sink(w);
    for (int t = 0; t < physics.ticks; ++t) {
        for (std::size_t i = 0; i < w.robots.size(); ++i) {
            const Observation obs = observe(w, i);
            commands[i] = tick(*w.robots[i].program, obs);
        }
        step(w, commands);
        if (sink)
            sink(w);
    }
    return finalize_stats(w);
}

}  // namespace swarmcode
