#include "swarmcode/serialize.hpp"

#include <stdexcept>

namespace swarmcode {

using nlohmann::json;

namespace {

std::string tag_string(const Tag& t)
{
    std::string s;
    for (auto b : t.bits)
        s.push_back(b ? '1' : '0');
    return s;
}

Tag tag_from_string(const std::string& s)
{
    Tag t;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("tag: expected a string of 0/1");
        t.bits.push_back(c == '1' ? 1 : 0);
    }
    return t;
}

const char* effector_name(EndEffector e) { return e == EndEffector::Pincher ? "pincher" : "suction"; }

EndEffector effector_from(const std::string& s)
{
    if (s == "pincher")
        return EndEffector::Pincher;
    if (s == "suction")
        return EndEffector::Suction;
    throw std::invalid_argument("unknown end effector " + s);
}

json team_to_json(const TeamSummary& t)
{
    return {{"cost", t.cost},
            {"species_count", t.species_count},
            {"deliveries", t.deliveries},
            {"individual_deliveries", t.individual_deliveries},
            {"collab_deliveries", t.collab_deliveries},
            {"energy_used_pct", t.energy_used_pct},
            {"species", t.species},
            {"counts", t.counts}};
}

TeamSummary team_from_json(const json& j)
{
    TeamSummary t;
    t.cost = j.at("cost").get<double>();
    t.species_count = j.at("species_count").get<int>();
    t.deliveries = j.at("deliveries").get<double>();
    t.individual_deliveries = j.at("individual_deliveries").get<double>();
    t.collab_deliveries = j.at("collab_deliveries").get<double>();
    t.energy_used_pct = j.at("energy_used_pct").get<double>();
    t.species = j.at("species").get<std::vector<SpeciesId>>();
    t.counts = j.at("counts").get<std::vector<int>>();
    return t;
}

}  // namespace

json genome_to_json(const Genome& g)
{
    const auto& hw = g.hardware;
    return {{"id", g.id},
            {"tag", tag_string(g.tag)},
            {"selectivity", g.selectivity},
            {"dominance", g.dominance},
            {"bt", g.behavior.opcodes},
            {"hardware",
             {{"radius", hw.radius},
              {"chassis_tier", hw.chassis_tier},
              {"battery_tier", hw.battery_tier},
              {"motor_tier", hw.motor_tier},
              {"end_effector", effector_name(hw.end_effector)},
              {"torque_setpoint", hw.torque_setpoint},
              {"battery_setpoint", hw.battery_setpoint}}}};
}

Genome genome_from_json(const json& j)
{
    Genome g;
    g.id = j.at("id").get<GenomeId>();
    g.tag = tag_from_string(j.at("tag").get<std::string>());
    g.selectivity = j.at("selectivity").get<double>();
    g.dominance = j.at("dominance").get<double>();
    g.behavior.opcodes = j.at("bt").get<std::vector<std::uint8_t>>();
    const auto& h = j.at("hardware");
    g.hardware.radius = h.at("radius").get<double>();
    g.hardware.chassis_tier = h.at("chassis_tier").get<int>();
    g.hardware.battery_tier = h.at("battery_tier").get<int>();
    g.hardware.motor_tier = h.at("motor_tier").get<int>();
    g.hardware.end_effector = effector_from(h.at("end_effector").get<std::string>());
    g.hardware.torque_setpoint = h.at("torque_setpoint").get<double>();
    g.hardware.battery_setpoint = h.at("battery_setpoint").get<double>();
    return g;
}

json partition_to_json(const SpeciesPartition& p)
{
    json species = json::array();
    for (const auto& s : p.species)
        species.push_back({{"id", s.id},
                           {"prototype", genome_to_json(s.prototype)},
                           {"members", s.members},
                           {"total_adjusted_fitness", s.total_adjusted_fitness},
                           {"age", s.age}});
    json assignment = json::array();
    for (const auto& [g, s] : p.assignment)
        assignment.push_back({g, s});
    return {{"species", species}, {"assignment", assignment}, {"next_id", p.next_id}};
}

SpeciesPartition partition_from_json(const json& j)
{
    SpeciesPartition p;
    for (const auto& s : j.at("species")) {
        Species sp;
        sp.id = s.at("id").get<SpeciesId>();
        sp.prototype = genome_from_json(s.at("prototype"));
        sp.members = s.at("members").get<std::vector<GenomeId>>();
        sp.total_adjusted_fitness = s.at("total_adjusted_fitness").get<double>();
        sp.age = s.at("age").get<int>();
        p.species.push_back(std::move(sp));
    }
    for (const auto& a : j.at("assignment"))
        p.assignment[a.at(0).get<GenomeId>()] = a.at(1).get<SpeciesId>();
    p.next_id = j.at("next_id").get<SpeciesId>();
    return p;
}

json best_team_to_json(const BestTeam& b)
{
    json participants = json::array();
    for (const auto& g : b.composition.participants)
        participants.push_back(genome_to_json(g));
    return {{"genome_id", b.genome_id},
            {"species_id", b.species_id},
            {"fitness", b.fitness},
            {"team", team_to_json(b.team)},
            {"participants", participants},
            {"slots", b.composition.slots}};
}

BestTeam best_team_from_json(const json& j)
{
    BestTeam b;
    b.genome_id = j.at("genome_id").get<GenomeId>();
    b.species_id = j.at("species_id").get<SpeciesId>();
    b.fitness = j.at("fitness").get<double>();
    b.team = team_from_json(j.at("team"));
    for (const auto& g : j.at("participants"))
        b.composition.participants.push_back(genome_from_json(g));
    b.composition.slots = j.at("slots").get<std::vector<std::size_t>>();
    b.composition.has_focal = !b.composition.participants.empty();
    return b;
}

json state_to_json(const EvolutionState& s)
{
    json population = json::array();
    for (const auto& g : s.population)
        population.push_back(genome_to_json(g));
    json fitness = json::array();
    for (const auto& [id, f] : s.fitness)
        fitness.push_back({id, f});
    json j = {{"generation", s.generation},
              {"population", population},
              {"partition", partition_to_json(s.partition)},
              {"fitness", fitness},
              {"next_genome_id", s.next_genome_id},
              {"rng", s.rng.state()}};
    j["best"] = s.best ? best_team_to_json(*s.best) : json(nullptr);
    return j;
}

EvolutionState state_from_json(const json& j)
{
    EvolutionState s;
    s.generation = j.at("generation").get<int>();
    for (const auto& g : j.at("population"))
        s.population.push_back(genome_from_json(g));
    s.partition = partition_from_json(j.at("partition"));
    for (const auto& f : j.at("fitness"))
        s.fitness[f.at(0).get<GenomeId>()] = f.at(1).get<double>();
    s.next_genome_id = j.at("next_genome_id").get<GenomeId>();
    s.rng.restore(j.at("rng").get<std::string>());
    if (!j.at("best").is_null())
        s.best = best_team_from_json(j.at("best"));
    return s;
}

json report_to_json(const GenerationReport& r)
{
    json census = json::array();
    for (const auto& [id, n] : r.census)
        census.push_back({{"species", id}, {"size", n}});
    json traits = json::array();
    for (const auto& [id, t] : r.traits)
        traits.push_back({{"species", id},
                          {"size", t.size},
                          {"radius", t.radius},
                          {"chassis_tier", t.chassis_tier},
                          {"battery_tier", t.battery_tier},
                          {"motor_tier", t.motor_tier},
                          {"pincher_fraction", t.pincher_fraction},
                          {"torque_setpoint", t.torque_setpoint},
                          {"battery_setpoint", t.battery_setpoint},
                          {"selectivity", t.selectivity},
                          {"dominance", t.dominance},
                          {"mean_fitness", t.mean_fitness}});
    return {{"generation", r.generation},
            {"census", census},
            {"traits", traits},
            {"founded", r.founded},
            {"extinct", r.extinct},
            {"mean_fitness", r.mean_fitness},
            {"best", best_team_to_json(r.best)}};
}

json world_snapshot(const World& w)
{
    json robots = json::array();
    for (const auto& r : w.robots)
        robots.push_back({{"id", r.id},
                          {"genome", r.genome_id},
                          {"x", r.position.x},
                          {"y", r.position.y},
                          {"vx", r.velocity.x},
                          {"vy", r.velocity.y},
                          {"energy", r.energy},
                          {"holding", r.held_package ? json(*r.held_package) : json(nullptr)}});
    json packages = json::array();
    for (const auto& p : w.packages) {
        int occupied = 0;
        for (const auto& g : p.grip_points)
            occupied += g.occupied_by ? 1 : 0;
        packages.push_back({{"id", p.id},
                            {"x", p.position.x},
                            {"y", p.position.y},
                            {"kind", p.kind == PackageKind::Individual ? "individual" : "collab"},
                            {"delivered", p.delivered},
                            {"carried", p.carrier.has_value() || p.lifted},
                            {"grips_occupied", occupied}});
    }
    return {{"tick", w.tick}, {"robots", robots}, {"packages", packages}};
}

}  // namespace swarmcode
