#include "swarmcode/btvm.hpp"

#include <array>
#include <memory>
#include <stdexcept>

namespace swarmcode {

std::string_view opcode_name(Opcode op)
{
    switch (op) {
    case Opcode::Seq: return "SEQ";
    case Opcode::Sel: return "SEL";
    case Opcode::CondHasPackage: return "COND_HAS_PACKAGE";
    case Opcode::CondNearPackage: return "COND_NEAR_PACKAGE";
    case Opcode::CondNearBase: return "COND_NEAR_BASE";
    case Opcode::CondAmIStuck: return "COND_AM_I_STUCK";
    case Opcode::ActMoveToPack: return "ACT_MOVE_TO_PACK";
    case Opcode::ActMoveToBase: return "ACT_MOVE_TO_BASE";
    case Opcode::ActRandomWalk: return "ACT_RANDOM_WALK";
    case Opcode::ActPickUp: return "ACT_PICK_UP";
    case Opcode::ActDrop: return "ACT_DROP";
    case Opcode::ActMoveToRandomPack: return "ACT_MOVE_TO_RANDOM_PACK";
    case Opcode::End: return "END";
    case Opcode::Nop: return "NOP";
    }
    return "?";
}

std::vector<std::uint8_t> Program::opcodes() const
{
    std::vector<std::uint8_t> out;
    out.reserve(instructions.size());
    for (const auto& ins : instructions)
        out.push_back(static_cast<std::uint8_t>(ins.opcode));
    return out;
}

namespace {

void assign_jumps(Program& p)
{
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
        auto& ins = p.instructions[i];
        ins.jump = static_cast<std::uint16_t>(i + 1);
        if (is_composite(ins.opcode)) {
            open.push_back(i);
        } else if (ins.opcode == Opcode::End) {
            p.instructions[open.back()].jump = static_cast<std::uint16_t>(i + 1);
            open.pop_back();
        }
    }
}

// Semantics of a single condition/action leaf given the observation.
TickResult evaluate_leaf(Opcode op, const Observation& obs)
{
    auto ok = [](bool b) { return TickResult{b ? Status::Success : Status::Failure, {}, {}}; };
    switch (op) {
    case Opcode::CondHasPackage: return ok(obs.has_package);
    case Opcode::CondNearPackage: return ok(obs.near_package);
    case Opcode::CondNearBase: return ok(obs.near_base);
    case Opcode::CondAmIStuck: return ok(obs.am_i_stuck);
    case Opcode::ActMoveToPack:
        if (!obs.nearest_package_id)
            return ok(false);
        if (obs.near_package)
            return ok(true);
        return {Status::Running, ActionKind::MoveToPackage, obs.nearest_package_id};
    case Opcode::ActMoveToBase:
        if (obs.near_base)
            return ok(true);
        return {Status::Running, ActionKind::MoveToBase, {}};
    case Opcode::ActRandomWalk:
        return {Status::Running, ActionKind::RandomWalk, {}};
    case Opcode::ActPickUp:
        if (obs.has_package || !obs.near_package || !obs.nearest_package_id)
            return ok(false);
        return {Status::Success, ActionKind::PickUp, obs.nearest_package_id};
    case Opcode::ActDrop:
        if (!obs.has_package)
            return ok(false);
        return {Status::Success, ActionKind::Drop, {}};
    case Opcode::ActMoveToRandomPack:
        if (!obs.random_package_id)
            return ok(false);
        if (obs.near_package)
            return ok(true);
        return {Status::Running, ActionKind::MoveToRandomPackage, obs.random_package_id};
    default:
        throw std::logic_error("evaluate_leaf: not a leaf opcode");
    }
}

}  // namespace

Program compile(std::span<const std::uint8_t> opcodes, std::size_t max_length)
{
    if (max_length == 0)
        max_length = opcodes.size();
    if (max_length < kMinProgramLength)
        throw std::invalid_argument("compile: program length below minimum of 3");

    std::vector<Opcode> out;
    out.reserve(max_length);
    std::size_t open = 0;
    std::size_t leaves = 0;
    bool started = false;

    for (std::uint8_t raw : opcodes) {
        const auto op = raw < kOpcodeCount ? static_cast<Opcode>(raw) : Opcode::Nop;
        if (op == Opcode::Nop)
            continue;
        if (!started) {
            if (!is_composite(op))
                break;  // root must be a control node
            started = true;
        }
        if (op == Opcode::End) {
            out.push_back(op);
            if (--open == 0)
                break;  // root closed; the remainder is unreachable
            continue;
        }
        // Room for this token plus the ENDs needed to close every open node.
        const std::size_t extra = is_composite(op) ? 1 : 0;
        if (out.size() + 1 + open + extra > max_length)
            break;
        out.push_back(op);
        if (is_composite(op))
            ++open;
        else
            ++leaves;
    }
    while (open > 0) {
        out.push_back(Opcode::End);
        --open;
    }

    if (leaves == 0)
        out = {Opcode::Sel, Opcode::ActRandomWalk, Opcode::End};

    Program p;
    p.instructions.resize(max_length);
    for (std::size_t i = 0; i < out.size(); ++i)
        p.instructions[i].opcode = out[i];
    assign_jumps(p);
    return p;
}

std::vector<std::uint8_t> canonicalize(std::span<const std::uint8_t> opcodes, std::size_t max_length)
{
    return compile(opcodes, max_length).opcodes();
}

std::size_t effective_length(const Program& p)
{
    if (p.instructions.empty())
        return 0;
    return p.instructions.front().jump;
}

TickResult tick(const Program& p, const Observation& obs)
{
    const auto& ins = p.instructions;
    const std::size_t n = ins.size();
    // Depth cannot exceed half the program length.
    std::array<std::uint16_t, 256> stack_buf;
    std::vector<std::uint16_t> stack_heap;
    std::uint16_t* stack = stack_buf.data();
    if (n > stack_buf.size()) {
        stack_heap.resize(n);
        stack = stack_heap.data();
    }
    std::size_t depth = 0;
    std::size_t pc = 0;
    Status status = Status::Failure;

    while (pc < n) {
        const Opcode op = ins[pc].opcode;
        if (is_composite(op)) {
            stack[depth++] = static_cast<std::uint16_t>(pc);
            ++pc;
            continue;
        }
        if (op == Opcode::Nop)
            break;
        if (op == Opcode::End) {
            const Opcode frame = ins[stack[--depth]].opcode;
            status = frame == Opcode::Seq ? Status::Success : Status::Failure;
            ++pc;
        } else {
            TickResult r = evaluate_leaf(op, obs);
            if (r.action)
                return r;
            status = r.status;
            ++pc;
        }
        // Short-circuit: a failing SEQ child or succeeding SEL child closes
        // the parent, which may in turn close its own parent.
        while (depth > 0) {
            const std::uint16_t parent = stack[depth - 1];
            const Opcode kind = ins[parent].opcode;
            const bool done = (kind == Opcode::Seq && status == Status::Failure) ||
                              (kind == Opcode::Sel && status == Status::Success);
            if (!done)
                break;
            --depth;
            pc = ins[parent].jump;
        }
        if (depth == 0)
            return {status, {}, {}};
    }
    return {status, {}, {}};
}

namespace {

struct Node {
    Opcode op;
    std::vector<Node> children;
};

Node decompile(const Program& p, std::size_t& pos)
{
    Node node{p.instructions[pos].opcode, {}};
    ++pos;
    if (!is_composite(node.op))
        return node;
    while (p.instructions[pos].opcode != Opcode::End)
        node.children.push_back(decompile(p, pos));
    ++pos;  // END
    return node;
}

struct Halt {
    TickResult result;
};

Status evaluate(const Node& node, const Observation& obs)
{
    if (!is_composite(node.op)) {
        TickResult r = evaluate_leaf(node.op, obs);
        if (r.action)
            throw Halt{r};
        return r.status;
    }
    const bool seq = node.op == Opcode::Seq;
    for (const auto& child : node.children) {
        const Status s = evaluate(child, obs);
        if (seq && s != Status::Success)
            return s;
        if (!seq && s != Status::Failure)
            return s;
    }
    return seq ? Status::Success : Status::Failure;
}

}  // namespace

TickResult reference_tick(const Program& p, const Observation& obs)
{
    std::size_t pos = 0;
    const Node root = decompile(p, pos);
    try {
        return {evaluate(root, obs), {}, {}};
    } catch (const Halt& h) {
        return h.result;
    }
}

}  // namespace swarmcode
