#pragma once

// The reference machine: a nine-instruction tape machine whose programs are
// self-delimiting bit strings (Elias-gamma instruction count, then one 4-bit
// opcode per instruction). Programs run as interactive environment processes.

#include "upsilon/environment.hpp"
#include "upsilon/interaction.hpp"
#include "upsilon/rng.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace upsilon {

enum class Instruction : std::uint8_t {
    MoveRight,
    MoveLeft,
    Inc,
    Dec,
    OpenBracket,
    CloseBracket,
    ReadAction,
    RandomBit,
    Yield,
};

inline constexpr std::size_t kInstructionCount = 9;
inline constexpr unsigned kOpcodeBits = 4;

using OpcodeTable = std::array<Instruction, kInstructionCount>;

/// Identity table: opcode c means Instruction(c).
OpcodeTable canonical_opcode_table();

std::string_view instruction_name(Instruction ins);       // e.g. "YIELD"
char instruction_symbol(Instruction ins);                  // e.g. '!'
std::optional<Instruction> parse_instruction(std::string_view name);

struct MachineConfig {
    std::uint32_t step_budget_per_cycle = 4096;
    std::uint32_t tape_length = 64;
    std::uint32_t cell_modulus = 256;
    OpcodeTable opcode_table = canonical_opcode_table();

    void validate() const;

    /// Instruction for a 4-bit code; empty for the seven reserved codes.
    std::optional<Instruction> instruction_for(unsigned code) const;
    unsigned code_for(Instruction ins) const;

    bool operator==(const MachineConfig&) const = default;
};

class InvalidProgram : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bit string, one element per bit, most significant first.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::vector<bool> bits) : bits_(std::move(bits)) {}

    /// Parse from a string of '0'/'1'.
    static BitString from_text(std::string_view text);
    /// Low `width` bits of `value`, most significant first.
    static BitString from_uint(std::uint64_t value, unsigned width);

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    bool operator[](std::size_t i) const { return bits_[i]; }

    void push_back(bool b) { bits_.push_back(b); }
    void append(const BitString& other);
    void append_uint(std::uint64_t value, unsigned width);

    bool is_prefix_of(const BitString& other) const;
    std::string to_text() const;

    auto operator<=>(const BitString&) const = default;
    bool operator==(const BitString&) const = default;

private:
    std::vector<bool> bits_;
};

/// Shortlex order: shorter first, then lexicographic.
bool shortlex_less(const BitString& a, const BitString& b);

/// Elias-gamma code of n >= 1.
BitString elias_gamma(std::uint64_t n);
/// Reads an Elias-gamma value at `pos`, advancing it. Empty on truncation.
std::optional<std::uint64_t> read_elias_gamma(const BitString& bits, std::size_t& pos);

struct EnvProgram {
    BitString bits;
    std::vector<Instruction> instructions;

    std::size_t length_bits() const { return bits.size(); }
    /// Mnemonic listing, one symbol per instruction (">+[!]").
    std::string listing() const;
};

/// Header is the Elias-gamma code of (instruction count + 1).
BitString encode_program(const std::vector<Instruction>& instructions, const MachineConfig& machine);

/// Throws InvalidProgram on a truncated header, trailing or missing bits,
/// a reserved opcode, or unbalanced brackets.
EnvProgram decode_program(const BitString& bits, const MachineConfig& machine);

/// Parse a mnemonic listing such as "+[>,[-<->]<<!]".
std::vector<Instruction> parse_listing(std::string_view listing);

/// All valid programs of at most `max_length_bits` bits, shortlex order.
std::vector<EnvProgram> enumerate_programs(std::size_t max_length_bits, const MachineConfig& machine);

/// Prior weight 2^-exponent, kept exact.
struct DyadicWeight {
    std::uint32_t exponent = 0;

    double value() const;
    bool operator==(const DyadicWeight&) const = default;
};

DyadicWeight prior_weight(const EnvProgram& p);

/// |p| + log2(steps_used); steps_used >= 1.
double kt_cost(const EnvProgram& p, std::uint64_t steps_used);

/// A program running as an environment. Holds the tape, instruction pointer,
/// reward budget and its own random-bit stream.
class EnvProcess final : public Environment {
public:
    /// `enforce_budget` = false runs the program without the summability cap;
    /// only fixtures mirroring non-summable native environments use it.
    EnvProcess(const EnvProgram& program, const MachineConfig& machine, const SpaceConfig& space,
               std::uint64_t seed, bool enforce_budget = true);

    const SpaceConfig& space() const override { return space_; }
    Percept step(std::optional<Action> action) override;
    bool summable() const override { return enforce_budget_; }
    std::uint64_t remaining_budget() const override { return budget_; }
    bool reward_exhausted() const override;

    bool halted() const { return halted_; }
    std::uint64_t cycles() const { return cycles_; }
    /// VM steps charged to the most recent cycle (at most S).
    std::uint64_t last_cycle_steps() const { return last_cycle_steps_; }
    std::uint64_t max_cycle_steps() const { return max_cycle_steps_; }
    std::uint64_t total_steps() const { return total_steps_; }

private:
    struct Code {
        std::vector<Instruction> instructions;
        std::vector<std::uint32_t> jump;  // matching bracket index
    };

    std::shared_ptr<const Code> code_;
    MachineConfig machine_;
    SpaceConfig space_;
    bool enforce_budget_;

    std::vector<std::uint32_t> tape_;
    std::vector<std::uint32_t> snapshot_;
    std::uint32_t ip_ = 0;
    std::uint32_t ptr_ = 0;
    std::uint64_t budget_;
    bool halted_ = false;
    bool started_ = false;
    std::uint32_t last_action_ = 0;
    Rng rng_;

    // A timed-out cycle that touched no randomness and left the machine state
    // unchanged repeats exactly for the same action value.
    bool silent_any_action_ = false;
    std::optional<std::uint32_t> silent_action_;

    std::uint64_t cycles_ = 0;
    std::uint64_t last_cycle_steps_ = 0;
    std::uint64_t max_cycle_steps_ = 0;
    std::uint64_t total_steps_ = 0;
};

/// Source wrapper: fresh EnvProcess per seed.
EnvironmentSource program_source(std::string id, const EnvProgram& program, const MachineConfig& machine,
                                 const SpaceConfig& space, bool enforce_budget = true);

struct SignatureLimits {
    /// Largest number of action sequences explored.
    std::uint64_t max_sequences = std::uint64_t{1} << 20;
};

/// Percepts over every action sequence of length <= horizon (depth-first,
/// actions in index order), random bits drawn from one fixed seed. Equal
/// signatures mean behavior indistinguishable up to the horizon.
/// Throws std::invalid_argument when |A|^horizon exceeds the limits.
std::string behavior_signature(const EnvProgram& p, std::size_t horizon, const SpaceConfig& space,
                               const MachineConfig& machine, SignatureLimits limits = {});

/// VM steps used over the first `cycles` cycles when the agent always answers
/// action 0; at least 1. Feeds the Kt weighting.
std::uint64_t execution_steps(const EnvProgram& p, std::size_t cycles, const SpaceConfig& space,
                              const MachineConfig& machine);

}  // namespace upsilon
