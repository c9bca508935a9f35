#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace swarmcode {

// Behavior-tree instruction set. Numbering is part of the log format.
enum class Opcode : std::uint8_t {
    Seq = 0,
    Sel = 1,
    CondHasPackage = 2,
    CondNearPackage = 3,
    CondNearBase = 4,
    CondAmIStuck = 5,
    ActMoveToPack = 6,
    ActMoveToBase = 7,
    ActRandomWalk = 8,
    ActPickUp = 9,
    ActDrop = 10,
    ActMoveToRandomPack = 11,
    End = 12,
    Nop = 13,
};

inline constexpr int kOpcodeCount = 14;
inline constexpr int kFirstLeafOpcode = 2;
inline constexpr int kLastLeafOpcode = 11;

constexpr bool is_composite(Opcode op) { return op == Opcode::Seq || op == Opcode::Sel; }
constexpr bool is_condition(Opcode op)
{
    return op >= Opcode::CondHasPackage && op <= Opcode::CondAmIStuck;
}
constexpr bool is_action(Opcode op)
{
    return op >= Opcode::ActMoveToPack && op <= Opcode::ActMoveToRandomPack;
}
constexpr bool is_leaf(Opcode op) { return is_condition(op) || is_action(op); }

std::string_view opcode_name(Opcode op);

enum class Status : std::uint8_t { Success, Failure, Running };

enum class ActionKind : std::uint8_t {
    MoveToPackage,
    MoveToBase,
    RandomWalk,
    PickUp,
    Drop,
    MoveToRandomPackage,
};

struct Instruction {
    Opcode opcode = Opcode::Nop;
    // For SEQ/SEL: one past the matching END. Otherwise the next index.
    std::uint16_t jump = 0;
};

// Canonical, executable behavior tree. Length is the run-wide maximum.
struct Program {
    std::vector<Instruction> instructions;

    std::size_t size() const { return instructions.size(); }
    // Raw opcode array as stored in genomes and logs.
    std::vector<std::uint8_t> opcodes() const;
};

struct Observation {
    bool has_package = false;
    bool near_package = false;
    bool near_base = false;
    bool am_i_stuck = false;
    std::optional<std::uint32_t> nearest_package_id;
    std::optional<std::uint32_t> random_package_id;
};

struct TickResult {
    Status status = Status::Failure;
    std::optional<ActionKind> action;
    std::optional<std::uint32_t> target;

    bool operator==(const TickResult&) const = default;
};

// Minimum program length able to hold the fallback tree.
inline constexpr std::size_t kMinProgramLength = 3;

// Repairs an arbitrary opcode array into a canonical tree and computes
// jump indices. Never fails; `max_length` defaults to the input length.
// Repair rules: NOPs are dropped, the root must be SEQ/SEL, tokens after
// the root's END are discarded, open subtrees are closed at the end, and
// a tree with no leaves becomes [SEL, ACT_RANDOM_WALK, END].
Program compile(std::span<const std::uint8_t> opcodes, std::size_t max_length = 0);

// Canonical opcode array (compile followed by opcodes()).
std::vector<std::uint8_t> canonicalize(std::span<const std::uint8_t> opcodes,
                                       std::size_t max_length = 0);

// Number of meaningful instructions (root SEQ/SEL through its END).
std::size_t effective_length(const Program& p);

// Flat interpreter: one forward pass, jumps skip remaining siblings, halts
// at the first instruction that emits an action command.
TickResult tick(const Program& p, const Observation& obs);

// Recursive interpreter over the decompiled tree; differential oracle for
// tick().
TickResult reference_tick(const Program& p, const Observation& obs);

}  // namespace swarmcode
