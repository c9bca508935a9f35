#include "swarmcode/genome.hpp"

#include <algorithm>
#include <string>

namespace swarmcode {

namespace {

constexpr auto op(Opcode o) { return static_cast<std::uint8_t>(o); }

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

std::uint8_t random_leaf(Rng& rng)
{
    return static_cast<std::uint8_t>(rng.uniform_int(kFirstLeafOpcode, kLastLeafOpcode));
}

int reassign_tier(int current, Rng& rng)
{
    // Uniform among the two other tiers.
    int t = rng.uniform_int(1, 2);
    return t >= current ? t + 1 : t;
}

// Random subtree of depth <= 2 with 1-3 leaves per control node.
void random_subtree(std::vector<std::uint8_t>& out, Rng& rng, int depth)
{
    if (depth == 0 || rng.bernoulli(0.5)) {
        out.push_back(random_leaf(rng));
        return;
    }
    out.push_back(rng.bernoulli(0.5) ? op(Opcode::Seq) : op(Opcode::Sel));
    const int children = rng.uniform_int(1, 3);
    for (int i = 0; i < children; ++i)
        random_subtree(out, rng, depth - 1);
    out.push_back(op(Opcode::End));
}

std::vector<std::uint8_t> mutate_behavior(const std::vector<std::uint8_t>& genes, bool point,
                                          Rng& rng)
{
    const std::size_t length = genes.size();
    const Program prog = compile(genes, length);
    const std::size_t eff = effective_length(prog);
    std::vector<std::uint8_t> ops = prog.opcodes();

    if (point) {
        std::vector<std::size_t> sites;
        for (std::size_t i = 0; i < eff; ++i)
            if (ops[i] != op(Opcode::End))
                sites.push_back(i);
        const std::size_t i = sites[rng.index(sites.size())];
        const auto cur = static_cast<Opcode>(ops[i]);
        if (is_composite(cur)) {
            ops[i] = cur == Opcode::Seq ? op(Opcode::Sel) : op(Opcode::Seq);
        } else {
            std::uint8_t repl;
            do {
                repl = random_leaf(rng);
            } while (repl == ops[i]);
            ops[i] = repl;
        }
        return canonicalize(ops, length);
    }

    // Subtree replacement at any node below the root.
    std::vector<std::size_t> sites;
    for (std::size_t i = 1; i < eff; ++i)
        if (ops[i] != op(Opcode::End))
            sites.push_back(i);
    if (sites.empty())
        return ops;
    const std::size_t at = sites[rng.index(sites.size())];
    const std::size_t stop = prog.instructions[at].jump;  // one past the subtree
    std::vector<std::uint8_t> fresh;
    random_subtree(fresh, rng, 2);
    std::vector<std::uint8_t> spliced(ops.begin(), ops.begin() + static_cast<long>(at));
    spliced.insert(spliced.end(), fresh.begin(), fresh.end());
    spliced.insert(spliced.end(), ops.begin() + static_cast<long>(stop), ops.begin() + static_cast<long>(eff));
    return canonicalize(spliced, length);
}

double perturb(double value, double sigma, double lo, double hi, Rng& rng)
{
    return std::clamp(rng.normal(value, sigma), lo, hi);
}

}  // namespace

void GenomeConfig::validate() const
{
    require(tag_length >= 1, "genome.tag_length: must be >= 1");
    require(bt_length >= static_cast<int>(kMinProgramLength) && bt_length <= 4096,
            "genome.bt_length: must be in [3, 4096]");
    require(radius_min > 0.0, "genome.radius_min: must be > 0");
    require(radius_min < radius_max, "genome.radius_min: must be < genome.radius_max");
    require(is_prob(selectivity_init_min) && is_prob(selectivity_init_max) &&
                selectivity_init_min <= selectivity_init_max,
            "genome.selectivity_init: must be an ordered range within [0, 1]");
    require(is_prob(dominance_init_min) && is_prob(dominance_init_max) &&
                dominance_init_min <= dominance_init_max,
            "genome.dominance_init: must be an ordered range within [0, 1]");
    require(is_prob(setpoint_init_min) && is_prob(setpoint_init_max) &&
                setpoint_init_min <= setpoint_init_max,
            "genome.setpoint_init: must be an ordered range within [0, 1]");
    require(is_prob(template_leaf_noise), "genome.template_leaf_noise: must be in [0, 1]");
}

void MutationConfig::validate() const
{
    const std::pair<double, const char*> probs[] = {
        {tag_flip_p, "mutation.tag_flip_p"},     {selectivity_p, "mutation.selectivity_p"},
        {dominance_p, "mutation.dominance_p"},   {radius_p, "mutation.radius_p"},
        {setpoint_p, "mutation.setpoint_p"},     {tier_p, "mutation.tier_p"},
        {effector_p, "mutation.effector_p"},     {bt_p, "mutation.bt_p"},
        {bt_point_fraction, "mutation.bt_point_fraction"},
    };
    for (auto [p, name] : probs)
        require(is_prob(p), std::string(name) + ": must be in [0, 1]");
    const std::pair<double, const char*> sigmas[] = {
        {selectivity_sigma, "mutation.selectivity_sigma"},
        {dominance_sigma, "mutation.dominance_sigma"},
        {radius_sigma, "mutation.radius_sigma"},
        {setpoint_sigma, "mutation.setpoint_sigma"},
    };
    for (auto [s, name] : sigmas)
        require(s >= 0.0, std::string(name) + ": must be >= 0");
}

const std::vector<std::vector<std::uint8_t>>& seed_templates()
{
    using O = Opcode;
    static const std::vector<std::vector<std::uint8_t>> templates = {
        // forage-return loop
        {op(O::Sel),
         op(O::Seq), op(O::CondHasPackage), op(O::ActMoveToBase), op(O::End),
         op(O::Seq), op(O::CondNearPackage), op(O::ActPickUp), op(O::End),
         op(O::ActMoveToPack),
         op(O::End)},
        // random-walk explorer
        {op(O::Sel),
         op(O::Seq), op(O::CondHasPackage), op(O::ActMoveToBase), op(O::End),
         op(O::Seq), op(O::CondNearPackage), op(O::ActPickUp), op(O::End),
         op(O::Seq), op(O::CondAmIStuck), op(O::ActMoveToRandomPack), op(O::End),
         op(O::ActRandomWalk),
         op(O::End)},
        // conditional collaborator
        {op(O::Sel),
         op(O::Seq), op(O::CondHasPackage), op(O::ActMoveToBase), op(O::End),
         op(O::Seq), op(O::CondNearPackage), op(O::ActPickUp), op(O::End),
         op(O::Seq), op(O::CondAmIStuck), op(O::ActDrop), op(O::End),
         op(O::ActMoveToRandomPack),
         op(O::End)},
    };
    return templates;
}

Genome random_genome(const GenomeConfig& config, Rng& rng)
{
    config.validate();
    Genome g;
    g.tag.bits.resize(static_cast<std::size_t>(config.tag_length));
    for (auto& b : g.tag.bits)
        b = rng.bernoulli(0.5) ? 1 : 0;
    g.selectivity = rng.uniform(config.selectivity_init_min, config.selectivity_init_max);
    g.dominance = rng.uniform(config.dominance_init_min, config.dominance_init_max);

    const auto& templates = seed_templates();
    std::vector<std::uint8_t> ops = templates[rng.index(templates.size())];
    for (auto& o : ops)
        if (is_leaf(static_cast<Opcode>(o)) && rng.bernoulli(config.template_leaf_noise))
            o = random_leaf(rng);
    g.behavior.opcodes = canonicalize(ops, static_cast<std::size_t>(config.bt_length));

    auto& hw = g.hardware;
    hw.radius = rng.uniform(config.radius_min, config.radius_max);
    hw.chassis_tier = rng.uniform_int(1, 3);
    hw.battery_tier = rng.uniform_int(1, 3);
    hw.motor_tier = rng.uniform_int(1, 3);
    hw.end_effector = rng.bernoulli(0.5) ? EndEffector::Pincher : EndEffector::Suction;
    hw.torque_setpoint = rng.uniform(config.setpoint_init_min, config.setpoint_init_max);
    hw.battery_setpoint = rng.uniform(config.setpoint_init_min, config.setpoint_init_max);
    return g;
}

MutationOutcome mutate_traced(const Genome& g, const GenomeConfig& config, const MutationConfig& mc,
                              Rng& rng)
{
    MutationOutcome out{g, BehaviorMutation::None};
    Genome& c = out.genome;
    c.id = kUnassignedId;

    for (auto& b : c.tag.bits)
        if (rng.bernoulli(mc.tag_flip_p))
            b ^= 1;
    if (rng.bernoulli(mc.selectivity_p))
        c.selectivity = perturb(c.selectivity, mc.selectivity_sigma, 0.0, 1.0, rng);
    if (rng.bernoulli(mc.dominance_p))
        c.dominance = perturb(c.dominance, mc.dominance_sigma, 0.0, 1.0, rng);

    auto& hw = c.hardware;
    if (rng.bernoulli(mc.radius_p)) {
        const double span = config.radius_max - config.radius_min;
        hw.radius = perturb(hw.radius, mc.radius_sigma * span, config.radius_min, config.radius_max, rng);
    }
    if (rng.bernoulli(mc.setpoint_p))
        hw.torque_setpoint = perturb(hw.torque_setpoint, mc.setpoint_sigma, 0.0, 1.0, rng);
    if (rng.bernoulli(mc.setpoint_p))
        hw.battery_setpoint = perturb(hw.battery_setpoint, mc.setpoint_sigma, 0.0, 1.0, rng);
    for (int* tier : {&hw.chassis_tier, &hw.battery_tier, &hw.motor_tier})
        if (rng.bernoulli(mc.tier_p))
            *tier = reassign_tier(*tier, rng);
    if (rng.bernoulli(mc.effector_p))
        hw.end_effector = hw.end_effector == EndEffector::Suction ? EndEffector::Pincher
                                                                   : EndEffector::Suction;

    if (rng.bernoulli(mc.bt_p)) {
        const bool point = rng.bernoulli(mc.bt_point_fraction);
        out.behavior = point ? BehaviorMutation::Point : BehaviorMutation::Subtree;
        c.behavior.opcodes = mutate_behavior(c.behavior.opcodes, point, rng);
    }
    return out;
}

Genome mutate(const Genome& g, const GenomeConfig& config, const MutationConfig& mc, Rng& rng)
{
    return mutate_traced(g, config, mc, rng).genome;
}

Genome crossover(const Genome& a, const Genome& b, Rng& rng, CrossoverStyle style)
{
    if (a.tag.size() != b.tag.size() || a.behavior.opcodes.size() != b.behavior.opcodes.size())
        throw ShapeError("crossover: parents differ in tag or behavior-tree length");

    auto pick = [&rng](const auto& x, const auto& y) { return rng.bernoulli(0.5) ? x : y; };
    auto mix = [&](double x, double y) {
        if (style == CrossoverStyle::Blend) {
            // Exact for x == y and never outside [min, max].
            const double u = rng.uniform();
            return std::clamp(y + u * (x - y), std::min(x, y), std::max(x, y));
        }
        return pick(x, y);
    };

    Genome c;
    c.tag = pick(a.tag, b.tag);
    c.selectivity = mix(a.selectivity, b.selectivity);
    c.dominance = mix(a.dominance, b.dominance);
    c.behavior = pick(a.behavior, b.behavior);
    const auto& ha = a.hardware;
    const auto& hb = b.hardware;
    auto& hc = c.hardware;
    hc.radius = mix(ha.radius, hb.radius);
    hc.chassis_tier = pick(ha.chassis_tier, hb.chassis_tier);
    hc.battery_tier = pick(ha.battery_tier, hb.battery_tier);
    hc.motor_tier = pick(ha.motor_tier, hb.motor_tier);
    hc.end_effector = pick(ha.end_effector, hb.end_effector);
    hc.torque_setpoint = mix(ha.torque_setpoint, hb.torque_setpoint);
    hc.battery_setpoint = mix(ha.battery_setpoint, hb.battery_setpoint);
    return c;
}

void check_invariants(const Genome& g, const GenomeConfig& config)
{
    require(g.tag.size() == static_cast<std::size_t>(config.tag_length), "tag: wrong length");
    for (auto b : g.tag.bits)
        require(b == 0 || b == 1, "tag: non-binary bit");
    require(g.selectivity >= 0.0 && g.selectivity <= 1.0, "selectivity: outside [0, 1]");
    require(g.dominance >= 0.0 && g.dominance <= 1.0, "dominance: outside [0, 1]");
    require(g.behavior.opcodes.size() == static_cast<std::size_t>(config.bt_length),
            "behavior: wrong length");
    bool any_active = false;
    for (auto o : g.behavior.opcodes) {
        require(o < kOpcodeCount, "behavior: opcode outside [0, 13]");
        any_active |= o != op(Opcode::Nop);
    }
    require(any_active, "behavior: all NOP");
    const auto& hw = g.hardware;
    require(hw.radius >= config.radius_min && hw.radius <= config.radius_max,
            "hardware.radius: outside [radius_min, radius_max]");
    for (int t : {hw.chassis_tier, hw.battery_tier, hw.motor_tier})
        require(t >= 1 && t <= 3, "hardware: tier outside {1, 2, 3}");
    require(hw.torque_setpoint >= 0.0 && hw.torque_setpoint <= 1.0,
            "hardware.torque_setpoint: outside [0, 1]");
    require(hw.battery_setpoint >= 0.0 && hw.battery_setpoint <= 1.0,
            "hardware.battery_setpoint: outside [0, 1]");
}

}  // namespace swarmcode
