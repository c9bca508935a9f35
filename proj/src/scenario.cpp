#include "swarmcode/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace swarmcode {

using nlohmann::json;

namespace {

template <class E>
struct EnumNames;

template <>
struct EnumNames<Objective> {
    static constexpr std::pair<Objective, const char*> table[] = {
        {Objective::Fitness, "fitness"}, {Objective::Roi, "roi"}};
};
template <>
struct EnumNames<CollabGrips> {
    static constexpr std::pair<CollabGrips, const char*> table[] = {
        {CollabGrips::Suction, "suction"}, {CollabGrips::Pincher, "pincher"}, {CollabGrips::Mixed, "mixed"}};
};
template <>
struct EnumNames<CrossoverStyle> {
    static constexpr std::pair<CrossoverStyle, const char*> table[] = {
        {CrossoverStyle::Uniform, "uniform"}, {CrossoverStyle::Blend, "blend"}};
};

template <class E>
concept NamedEnum = requires { EnumNames<E>::table; };

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

// Reads fields from a JSON object, tracking which keys were consumed.
class Reader {
public:
    Reader(const json& j, std::vector<Diagnostic>& d) : diag_(d) { stack_.push_back({&j, "", {}}); }

    template <class T>
    void field(const char* key, T& out)
    {
        Frame& f = stack_.back();
        if (!f.node)
            return;
        f.used.insert(key);
        auto it = f.node->find(key);
        if (it == f.node->end())
            return;
        const std::string path = join(f.path, key);
        read(*it, out, path);
    }

    template <class Fn>
    void section(const char* key, Fn&& body)
    {
        Frame& f = stack_.back();
        f.used.insert(key);
        const json* child = nullptr;
        const std::string path = join(f.path, key);
        if (f.node) {
            auto it = f.node->find(key);
            if (it != f.node->end()) {
                if (it->is_object())
                    child = &*it;
                else
                    error(path, "expected an object");
            }
        }
        stack_.push_back({child, path, {}});
        body();
        finish_frame();
        stack_.pop_back();
    }

    void finish() { finish_frame(); }

private:
    struct Frame {
        const json* node;
        std::string path;
        std::set<std::string> used;
    };

    void error(const std::string& path, const std::string& msg)
    {
        diag_.push_back({Diagnostic::Severity::Error, path, msg});
    }

    void finish_frame()
    {
        const Frame& f = stack_.back();
        if (!f.node)
            return;
        if (!f.node->is_object()) {
            error(f.path, "expected an object");
            return;
        }
        for (auto it = f.node->begin(); it != f.node->end(); ++it)
            if (!f.used.count(it.key()))
                error(join(f.path, it.key()), "unknown key");
    }

    void read(const json& v, double& out, const std::string& path)
    {
        if (v.is_null())
            out = std::numeric_limits<double>::infinity();
        else if (v.is_number())
            out = v.get<double>();
        else
            error(path, "expected a number");
    }
    void read(const json& v, int& out, const std::string& path)
    {
        if (v.is_number_integer())
            out = v.get<int>();
        else
            error(path, "expected an integer");
    }
    void read(const json& v, std::uint64_t& out, const std::string& path)
    {
        if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))
            out = v.get<std::uint64_t>();
        else
            error(path, "expected a non-negative integer");
    }
    void read(const json& v, bool& out, const std::string& path)
    {
        if (v.is_boolean())
            out = v.get<bool>();
        else
            error(path, "expected true or false");
    }
    void read(const json& v, std::string& out, const std::string& path)
    {
        if (v.is_string())
            out = v.get<std::string>();
        else
            error(path, "expected a string");
    }
    void read(const json& v, std::array<double, 3>& out, const std::string& path)
    {
        if (!v.is_array() || v.size() != 3) {
            error(path, "expected an array of 3 numbers");
            return;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!v[i].is_number()) {
                error(path, "expected an array of 3 numbers");
                return;
            }
            out[i] = v[i].get<double>();
        }
    }
    template <NamedEnum E>
    void read(const json& v, E& out, const std::string& path)
    {
        if (v.is_string()) {
            for (auto [e, name] : EnumNames<E>::table) {
                if (v.get<std::string>() == name) {
                    out = e;
                    return;
                }
            }
        }
        std::string allowed;
        for (auto [e, name] : EnumNames<E>::table)
            allowed += (allowed.empty() ? "" : ", ") + std::string(name);
        error(path, "expected one of: " + allowed);
    }

    std::vector<Diagnostic>& diag_;
    std::vector<Frame> stack_;
};

class Writer {
public:
    template <class T>
    void field(const char* key, const T& v)
    {
        json& node = *stack_.back();
        if constexpr (NamedEnum<T>) {
            for (auto [e, name] : EnumNames<T>::table)
                if (e == v)
                    node[key] = name;
        } else if constexpr (std::is_same_v<T, double>) {
            if (std::isinf(v))
                node[key] = nullptr;
            else
                node[key] = v;
        } else {
            node[key] = v;
        }
    }

    template <class Fn>
    void section(const char* key, Fn&& body)
    {
        json& node = (*stack_.back())[key];
        node = json::object();
        stack_.push_back(&node);
        body();
        stack_.pop_back();
    }

    json root = json::object();
    std::vector<json*> stack_{&root};
};

// Single field list shared by parsing and serialization.
template <class S, class V>
void visit(S& s, V& v)
{
    v.field("name", s.name);
    v.field("seed", s.seed);
    v.field("generations", s.generations);
    v.field("swarm_size", s.swarm_size);
    v.field("objective", s.objective);
    v.field("checkpoint_interval", s.checkpoint_interval);
    v.section("arena", [&] {
        auto& a = s.arena;
        v.field("width", a.width);
        v.field("height", a.height);
        v.field("base_radius", a.base_radius);
        v.field("obstacle_count", a.obstacle_count);
        v.field("obstacle_radius_min", a.obstacle_radius_min);
        v.field("obstacle_radius_max", a.obstacle_radius_max);
    });
    v.section("packages", [&] {
        auto& p = s.packages;
        v.field("circle_count", p.circle_count);
        v.field("square_count", p.square_count);
        v.field("collab_count", p.collab_count);
        v.field("grips_min", p.grips_min);
        v.field("grips_max", p.grips_max);
        v.field("collab_grips", p.collab_grips);
        v.field("radius_min", p.radius_min);
        v.field("radius_max", p.radius_max);
        v.field("collab_radius", p.collab_radius);
        v.field("weight_min", p.weight_min);
        v.field("weight_max", p.weight_max);
        v.field("collab_weight_min", p.collab_weight_min);
        v.field("collab_weight_max", p.collab_weight_max);
        v.field("distance_weights", p.distance_weights);
        v.field("base_clearance", p.base_clearance);
    });
    v.section("physics", [&] {
        auto& p = s.physics;
        v.field("dt", p.dt);
        v.field("ticks", p.ticks);
        v.field("max_speed", p.max_speed);
        v.field("kp", p.kp);
        v.field("kd", p.kd);
        v.field("pickup_range", p.pickup_range);
        v.field("restitution", p.restitution);
        v.field("chassis_density", p.chassis_density);
        v.field("battery_energy", p.battery_energy);
        v.field("battery_mass_per_joule", p.battery_mass_per_joule);
        v.field("motor_force", p.motor_force);
        v.field("motor_lift", p.motor_lift);
        v.field("lift_reference_radius", p.lift_reference_radius);
        v.field("lift_reserve", p.lift_reserve);
        v.field("move_energy", p.move_energy);
        v.field("idle_energy", p.idle_energy);
        v.field("stuck_window", p.stuck_window);
        v.field("stuck_fraction", p.stuck_fraction);
        v.field("diameter_band_min", p.diameter_band_min);
        v.field("diameter_band_max", p.diameter_band_max);
        v.field("walk_reach", p.walk_reach);
        v.field("walk_retarget_ticks", p.walk_retarget_ticks);
    });
    v.section("genome", [&] {
        auto& g = s.genome;
        v.field("tag_length", g.tag_length);
        v.field("bt_length", g.bt_length);
        v.field("radius_min", g.radius_min);
        v.field("radius_max", g.radius_max);
        v.field("selectivity_init_min", g.selectivity_init_min);
        v.field("selectivity_init_max", g.selectivity_init_max);
        v.field("dominance_init_min", g.dominance_init_min);
        v.field("dominance_init_max", g.dominance_init_max);
        v.field("setpoint_init_min", g.setpoint_init_min);
        v.field("setpoint_init_max", g.setpoint_init_max);
        v.field("template_leaf_noise", g.template_leaf_noise);
    });
    v.section("mutation", [&] {
        auto& m = s.mutation;
        v.field("tag_flip_p", m.tag_flip_p);
        v.field("selectivity_p", m.selectivity_p);
        v.field("selectivity_sigma", m.selectivity_sigma);
        v.field("dominance_p", m.dominance_p);
        v.field("dominance_sigma", m.dominance_sigma);
        v.field("radius_p", m.radius_p);
        v.field("radius_sigma", m.radius_sigma);
        v.field("setpoint_p", m.setpoint_p);
        v.field("setpoint_sigma", m.setpoint_sigma);
        v.field("tier_p", m.tier_p);
        v.field("effector_p", m.effector_p);
        v.field("bt_p", m.bt_p);
        v.field("bt_point_fraction", m.bt_point_fraction);
        v.field("crossover_style", m.crossover_style);
    });
    v.section("distance", [&] {
        auto& d = s.distance;
        v.field("w_tag", d.w_tag);
        v.field("w_hw", d.w_hw);
        v.field("w_bt", d.w_bt);
        v.field("w_tool", d.w_tool);
        v.field("w_size", d.w_size);
        v.field("gamma", d.gamma);
    });
    v.section("fitness", [&] {
        auto& f = s.fitness;
        v.field("delivery", f.delivery);
        v.field("collab_bonus", f.collab_bonus);
        v.field("pickup", f.pickup);
        v.field("energy", f.energy);
        v.field("proximity", f.proximity);
        v.field("closeness", f.closeness);
    });
    v.section("budget", [&] {
        auto& b = s.budget;
        v.field("budget", b.budget);
        v.field("lambda", b.lambda);
        v.field("floor", b.floor);
        v.field("species_fee", b.species_fee);
        v.section("costs", [&] {
            auto& c = b.costs;
            v.field("chassis", c.chassis);
            v.field("motor", c.motor);
            v.field("battery", c.battery);
            v.field("suction", c.suction);
            v.field("pincher", c.pincher);
            v.field("per_meter_radius", c.per_meter_radius);
        });
    });
    v.section("evaluation", [&] {
        auto& e = s.evaluation;
        v.field("n_trials", e.n_trials);
        v.field("p_marginal", e.p_marginal);
        v.field("alpha", e.alpha);
        v.field("fitness_sharing", e.fitness_sharing);
    });
    v.section("evolution", [&] {
        auto& e = s.evolution;
        v.field("population_size", e.population_size);
        v.field("elite_cap", e.elite_cap);
        v.field("tournament_size", e.tournament_size);
        v.field("max_partner_retries", e.max_partner_retries);
        v.field("intra_crossover_p", e.intra_crossover_p);
        v.field("inter_crossover_p", e.inter_crossover_p);
        v.field("delta", e.delta);
    });
}

void from_config_error(std::vector<Diagnostic>& out, const ConfigError& e)
{
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon == std::string::npos)
        out.push_back({Diagnostic::Severity::Error, "", msg});
    else
        out.push_back({Diagnostic::Severity::Error, msg.substr(0, colon), msg.substr(colon + 2)});
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, std::vector<Diagnostic>& diagnostics)
{
    ScenarioConfig s;
    if (!j.is_object()) {
        diagnostics.push_back({Diagnostic::Severity::Error, "", "scenario must be a JSON object"});
        return s;
    }
    Reader r(j, diagnostics);
    visit(s, r);
    r.finish();
    return s;
}

json scenario_to_json(const ScenarioConfig& s)
{
    Writer w;
    visit(s, w);
    return w.root;
}

std::vector<Diagnostic> validate_scenario(const ScenarioConfig& s)
{
    std::vector<Diagnostic> d;
    auto err = [&](const char* path, const std::string& msg) {
        d.push_back({Diagnostic::Severity::Error, path, msg});
    };
    auto warn = [&](const char* path, const std::string& msg) {
        d.push_back({Diagnostic::Severity::Warning, path, msg});
    };
    auto prob = [&](const char* path, double p) {
        if (!(p >= 0.0 && p <= 1.0))
            err(path, "must be in [0, 1]");
    };

    try { s.genome.validate(); } catch (const ConfigError& e) { from_config_error(d, e); }
    try { s.mutation.validate(); } catch (const ConfigError& e) { from_config_error(d, e); }
    try { s.distance.validate(); } catch (const ConfigError& e) { from_config_error(d, e); }
    try { s.budget.validate(); } catch (const ConfigError& e) { from_config_error(d, e); }

    if (s.swarm_size < 1) err("swarm_size", "must be >= 1");
    if (s.generations < 0) err("generations", "must be >= 0");
    if (s.checkpoint_interval < 1) err("checkpoint_interval", "must be >= 1");

    const auto& evo = s.evolution;
    if (evo.population_size < 2) err("evolution.population_size", "must be >= 2");
    if (evo.elite_cap < 1) err("evolution.elite_cap", "must be >= 1");
    if (evo.tournament_size < 1) err("evolution.tournament_size", "must be >= 1");
    if (evo.max_partner_retries < 0) err("evolution.max_partner_retries", "must be >= 0");
    prob("evolution.intra_crossover_p", evo.intra_crossover_p);
    prob("evolution.inter_crossover_p", evo.inter_crossover_p);
    if (!(evo.delta >= 0.0)) err("evolution.delta", "must be >= 0");

    const auto& ev = s.evaluation;
    if (ev.n_trials < 1) err("evaluation.n_trials", "must be >= 1");
    prob("evaluation.p_marginal", ev.p_marginal);
    prob("evaluation.alpha", ev.alpha);

    const auto& a = s.arena;
    if (!(a.width > 0.0)) err("arena.width", "must be > 0");
    if (!(a.height > 0.0)) err("arena.height", "must be > 0");
    if (!(a.base_radius > 0.0)) err("arena.base_radius", "must be > 0");
    if (a.obstacle_count < 0) err("arena.obstacle_count", "must be >= 0");
    if (!(a.obstacle_radius_min > 0.0 && a.obstacle_radius_min <= a.obstacle_radius_max))
        err("arena.obstacle_radius_min", "must be > 0 and <= arena.obstacle_radius_max");

    const auto& p = s.packages;
    if (p.circle_count < 0) err("packages.circle_count", "must be >= 0");
    if (p.square_count < 0) err("packages.square_count", "must be >= 0");
    if (p.collab_count < 0) err("packages.collab_count", "must be >= 0");
    if (!(p.grips_min >= 2 && p.grips_min <= p.grips_max && p.grips_max <= 4))
        err("packages.grips_min", "grip counts must satisfy 2 <= grips_min <= grips_max <= 4");
    if (!(p.radius_min > 0.0 && p.radius_min <= p.radius_max))
        err("packages.radius_min", "must be > 0 and <= packages.radius_max");
    if (!(p.collab_radius > 0.0)) err("packages.collab_radius", "must be > 0");
    if (!(p.weight_min > 0.0 && p.weight_min <= p.weight_max))
        err("packages.weight_min", "must be > 0 and <= packages.weight_max");
    if (!(p.collab_weight_min > 0.0 && p.collab_weight_min <= p.collab_weight_max))
        err("packages.collab_weight_min", "must be > 0 and <= packages.collab_weight_max");
    if (!(p.base_clearance >= 0.0)) err("packages.base_clearance", "must be >= 0");
    if (p.circle_count + p.square_count + p.collab_count == 0)
        warn("packages", "no packages: every trial scores the fitness floor");

    const auto& ph = s.physics;
    if (!(ph.dt > 0.0)) err("physics.dt", "must be > 0");
    if (ph.ticks < 1) err("physics.ticks", "must be >= 1");
    if (!(ph.max_speed > 0.0)) err("physics.max_speed", "must be > 0");
    if (!(ph.kp > 0.0)) err("physics.kp", "must be > 0");
    if (!(ph.kd > 0.0)) err("physics.kd", "must be > 0");
    if (!(ph.pickup_range >= 0.0)) err("physics.pickup_range", "must be >= 0");
    if (ph.pickup_range > 1.0) warn("physics.pickup_range", "larger than 1 m; pickups happen at a distance");
    prob("physics.restitution", ph.restitution);
    prob("physics.lift_reserve", ph.lift_reserve);
    if (!(ph.lift_reference_radius > 0.0)) err("physics.lift_reference_radius", "must be > 0");
    if (ph.stuck_window < 1) err("physics.stuck_window", "must be >= 1");
    if (!(ph.diameter_band_min > 0.0 && ph.diameter_band_min <= ph.diameter_band_max))
        err("physics.diameter_band_min", "must be > 0 and <= physics.diameter_band_max");
    for (auto [arr, name] : {std::pair{&ph.chassis_density, "physics.chassis_density"},
                             {&ph.battery_energy, "physics.battery_energy"},
                             {&ph.motor_force, "physics.motor_force"},
                             {&ph.motor_lift, "physics.motor_lift"}})
        for (double x : *arr)
            if (!(x > 0.0)) {
                err(name, "tier values must be > 0");
                break;
            }
    if (ph.max_speed * ph.dt >= s.genome.radius_min)
        err("physics.max_speed", "max_speed * dt must stay below genome.radius_min (no tunneling)");

    if (s.swarm_size < evo.population_size)
        warn("swarm_size", "below 1 + maximum possible partner count (" +
                               std::to_string(evo.population_size) +
                               "); surplus partners are dropped, farthest tags first");

    if (!has_errors(d)) {
        try {
            (void)generate_environment(s.arena, s.packages, s.physics, s.swarm_size, s.seed);
        } catch (const ScenarioError& e) {
            err("arena", std::string("infeasible layout: ") + e.what());
        }
    }
    return d;
}

bool has_errors(const std::vector<Diagnostic>& d)
{
    for (const auto& x : d)
        if (x.severity == Diagnostic::Severity::Error)
            return true;
    return false;
}

std::string format_diagnostics(const std::vector<Diagnostic>& d)
{
    std::ostringstream os;
    for (const auto& x : d)
        os << (x.severity == Diagnostic::Severity::Error ? "error" : "warning") << ": "
           << (x.path.empty() ? "<root>" : x.path) << ": " << x.message << "\n";
    return os.str();
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    std::vector<Diagnostic> d;
    ScenarioConfig s = scenario_from_json(j, d);
    if (!has_errors(d)) {
        auto more = validate_scenario(s);
        d.insert(d.end(), more.begin(), more.end());
    }
    if (has_errors(d))
        throw ConfigError(format_diagnostics(d));
    return s;
}

}  // namespace swarmcode
