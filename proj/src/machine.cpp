#include "upsilon/machine.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace upsilon {

namespace {

struct InstructionInfo {
    Instruction ins;
    std::string_view name;
    char symbol;
};

constexpr std::array<InstructionInfo, kInstructionCount> kInfo{{
    {Instruction::MoveRight, "MOVE_RIGHT", '>'},
    {Instruction::MoveLeft, "MOVE_LEFT", '<'},
    {Instruction::Inc, "INC", '+'},
    {Instruction::Dec, "DEC", '-'},
    {Instruction::OpenBracket, "OPEN_BRACKET", '['},
    {Instruction::CloseBracket, "CLOSE_BRACKET", ']'},
    {Instruction::ReadAction, "READ_ACTION", ','},
    {Instruction::RandomBit, "RANDOM_BIT", '?'},
    {Instruction::Yield, "YIELD", '!'},
}};

const InstructionInfo& info(Instruction ins) { return kInfo[static_cast<std::size_t>(ins)]; }

// Matching-bracket table; empty optional when unbalanced.
std::optional<std::vector<std::uint32_t>> match_brackets(const std::vector<Instruction>& code) {
    std::vector<std::uint32_t> jump(code.size(), 0);
    std::vector<std::uint32_t> open;
    for (std::uint32_t i = 0; i < code.size(); ++i) {
        if (code[i] == Instruction::OpenBracket) {
            open.push_back(i);
        } else if (code[i] == Instruction::CloseBracket) {
            if (open.empty()) return std::nullopt;
            jump[i] = open.back();
            jump[open.back()] = i;
            open.pop_back();
        }
    }
    if (!open.empty()) return std::nullopt;
    return jump;
}

}  // namespace

OpcodeTable canonical_opcode_table() {
    OpcodeTable t{};
    for (std::size_t i = 0; i < kInstructionCount; ++i) t[i] = static_cast<Instruction>(i);
    return t;
}

std::string_view instruction_name(Instruction ins) { return info(ins).name; }
char instruction_symbol(Instruction ins) { return info(ins).symbol; }

std::optional<Instruction> parse_instruction(std::string_view name) {
    for (const auto& i : kInfo)
        if (i.name == name || (name.size() == 1 && name[0] == i.symbol)) return i.ins;
    return std::nullopt;
}

void MachineConfig::validate() const {
    if (step_budget_per_cycle < 1) throw std::invalid_argument("step budget must be >= 1");
    if (tape_length < 2) throw std::invalid_argument("tape_length must be >= 2");
    if (cell_modulus < 2) throw std::invalid_argument("cell_modulus must be >= 2");
    std::array<bool, kInstructionCount> seen{};
    for (Instruction ins : opcode_table) {
        auto k = static_cast<std::size_t>(ins);
        if (k >= kInstructionCount || seen[k])
            throw std::invalid_argument("opcode table is not a permutation of the instruction set");
        seen[k] = true;
    }
}

std::optional<Instruction> MachineConfig::instruction_for(unsigned code) const {
    if (code >= kInstructionCount) return std::nullopt;
    return opcode_table[code];
}

unsigned MachineConfig::code_for(Instruction ins) const {
    auto it = std::find(opcode_table.begin(), opcode_table.end(), ins);
    return static_cast<unsigned>(it - opcode_table.begin());
}

// --- bit strings -----------------------------------------------------------

BitString BitString::from_text(std::string_view text) {
    BitString out;
    for (char c : text) {
        if (c != '0' && c != '1') throw std::invalid_argument("bit text must be 0/1");
        out.push_back(c == '1');
    }
    return out;
}

BitString BitString::from_uint(std::uint64_t value, unsigned width) {
    BitString out;
    out.append_uint(value, width);
    return out;
}

void BitString::append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

void BitString::append_uint(std::uint64_t value, unsigned width) {
    for (unsigned i = width; i-- > 0;) bits_.push_back(((value >> i) & 1u) != 0);
}

bool BitString::is_prefix_of(const BitString& other) const {
    return size() <= other.size() && std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

std::string BitString::to_text() const {
    std::string s;
    s.reserve(size());
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

bool shortlex_less(const BitString& a, const BitString& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

BitString elias_gamma(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Elias-gamma codes n >= 1");
    unsigned width = 0;
    while ((n >> width) > 1) ++width;
    BitString out;
    for (unsigned i = 0; i < width; ++i) out.push_back(false);
    out.append_uint(n, width + 1);
    return out;
}

std::optional<std::uint64_t> read_elias_gamma(const BitString& bits, std::size_t& pos) {
    std::size_t p = pos;
    unsigned zeros = 0;
    while (p < bits.size() && !bits[p]) {
        ++zeros;
        ++p;
    }
    if (p >= bits.size() || zeros > 62 || bits.size() - p < zeros + 1) return std::nullopt;
    std::uint64_t value = 0;
    for (unsigned i = 0; i <= zeros; ++i) value = (value << 1) | (bits[p++] ? 1u : 0u);
    pos = p;
    return value;
}

// --- programs --------------------------------------------------------------

std::string EnvProgram::listing() const {
    std::string s;
    for (Instruction ins : instructions) s.push_back(instruction_symbol(ins));
    return s;
}

BitString encode_program(const std::vector<Instruction>& instructions, const MachineConfig& machine) {
    BitString out = elias_gamma(instructions.size() + 1);
    for (Instruction ins : instructions) out.append_uint(machine.code_for(ins), kOpcodeBits);
    return out;
}

EnvProgram decode_program(const BitString& bits, const MachineConfig& machine) {
    std::size_t pos = 0;
    auto header = read_elias_gamma(bits, pos);
    if (!header) throw InvalidProgram("truncated instruction-count header");
    const std::uint64_t count = *header - 1;
    const std::size_t remaining = bits.size() - pos;
    if (count > remaining / kOpcodeBits || remaining < count * kOpcodeBits)
        throw InvalidProgram("insufficient bits for " + std::to_string(count) + " opcodes");
    if (remaining > count * kOpcodeBits)
        throw InvalidProgram("trailing bits after " + std::to_string(count) + " opcodes");

    EnvProgram p;
    p.bits = bits;
    p.instructions.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        unsigned code = 0;
        for (unsigned b = 0; b < kOpcodeBits; ++b) code = (code << 1) | (bits[pos++] ? 1u : 0u);
        auto ins = machine.instruction_for(code);
        if (!ins) throw InvalidProgram("reserved opcode " + std::to_string(code));
        p.instructions.push_back(*ins);
    }
    if (!match_brackets(p.instructions)) throw InvalidProgram("unbalanced brackets");
    return p;
}

std::vector<Instruction> parse_listing(std::string_view listing) {
    std::vector<Instruction> out;
    for (char c : listing) {
        if (c == ' ' || c == '\n' || c == '\t') continue;
        auto ins = parse_instruction(std::string_view(&c, 1));
        if (!ins) throw std::invalid_argument(std::string("unknown instruction symbol '") + c + "'");
        out.push_back(*ins);
    }
    return out;
}

std::vector<EnvProgram> enumerate_programs(std::size_t max_length_bits, const MachineConfig& machine) {
    std::vector<EnvProgram> out;
    for (std::size_t n = 0;; ++n) {
        const BitString header = elias_gamma(n + 1);
        const std::size_t length = header.size() + kOpcodeBits * n;
        if (length > max_length_bits) break;

        // Odometer over valid codes; lexicographic in the code digits, which is
        // lexicographic in the bits since every code has the same width.
        std::vector<unsigned> codes(n, 0);
        std::vector<Instruction> ins(n);
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) ins[i] = *machine.instruction_for(codes[i]);
            if (match_brackets(ins)) {
                EnvProgram p;
                p.bits = header;
                for (unsigned c : codes) p.bits.append_uint(c, kOpcodeBits);
                p.instructions = ins;
                out.push_back(std::move(p));
            }
            std::size_t i = n;
            while (i > 0 && codes[i - 1] + 1 == kInstructionCount) codes[--i] = 0;
            if (i == 0) break;
            ++codes[i - 1];
        }
    }
    return out;
}

double DyadicWeight::value() const { return std::ldexp(1.0, -static_cast<int>(exponent)); }

DyadicWeight prior_weight(const EnvProgram& p) {
    return DyadicWeight{static_cast<std::uint32_t>(p.length_bits())};
}

double kt_cost(const EnvProgram& p, std::uint64_t steps_used) {
    if (steps_used < 1) throw std::invalid_argument("kt_cost: steps_used must be >= 1");
    return static_cast<double>(p.length_bits()) + std::log2(static_cast<double>(steps_used));
}

// --- execution -------------------------------------------------------------

EnvProcess::EnvProcess(const EnvProgram& program, const MachineConfig& machine, const SpaceConfig& space,
                       std::uint64_t seed, bool enforce_budget)
    : machine_(machine),
      space_(space),
      enforce_budget_(enforce_budget),
      tape_(machine.tape_length, 0),
      budget_(space.reward_denominator),
      rng_(seed) {
    machine_.validate();
    space_.validate();
    auto jump = match_brackets(program.instructions);
    if (!jump) throw InvalidProgram("unbalanced brackets");
    code_ = std::make_shared<const Code>(Code{program.instructions, std::move(*jump)});
}

bool EnvProcess::reward_exhausted() const {
    return halted_ || silent_any_action_ || (enforce_budget_ && budget_ == 0);
}

Percept EnvProcess::step(std::optional<Action> action) {
    if (!started_) {
        if (action) throw ProtocolError("the first cycle takes no action");
        started_ = true;
    } else {
        if (!action) throw ProtocolError("an action is required after the first cycle");
        if (action->index >= space_.action_count) throw std::out_of_range("action out of range");
        last_action_ = action->index;
    }
    ++cycles_;
    last_cycle_steps_ = 0;
    if (halted_) return {};

    const std::uint32_t S = machine_.step_budget_per_cycle;
    if (silent_any_action_ || (silent_action_ && *silent_action_ == last_action_)) {
        last_cycle_steps_ = S;
        total_steps_ += S;
        max_cycle_steps_ = std::max<std::uint64_t>(max_cycle_steps_, S);
        return {};
    }
    silent_action_.reset();

    const auto& code = code_->instructions;
    const auto& jump = code_->jump;
    const std::uint32_t n = static_cast<std::uint32_t>(code.size());
    const std::uint32_t L = machine_.tape_length;
    const std::uint32_t M = machine_.cell_modulus;

    const std::uint32_t ip0 = ip_;
    const std::uint32_t ptr0 = ptr_;
    snapshot_.assign(tape_.begin(), tape_.end());
    bool read_action = false;
    bool used_random = false;

    std::uint64_t steps = 0;
    std::optional<Percept> emitted;
    while (steps < S) {
        if (ip_ >= n) {
            halted_ = true;
            break;
        }
        ++steps;
        std::uint32_t& cell = tape_[ptr_];
        switch (code[ip_]) {
            case Instruction::MoveRight: ptr_ = (ptr_ + 1) % L; break;
            case Instruction::MoveLeft: ptr_ = (ptr_ + L - 1) % L; break;
            case Instruction::Inc: cell = (cell + 1) % M; break;
            case Instruction::Dec: cell = (cell + M - 1) % M; break;
            case Instruction::OpenBracket:
                if (cell == 0) ip_ = jump[ip_];
                break;
            case Instruction::CloseBracket:
                if (cell != 0) ip_ = jump[ip_];
                break;
            case Instruction::ReadAction:
                cell = last_action_ % M;
                read_action = true;
                break;
            case Instruction::RandomBit:
                cell = rng_.bit() ? 1 : 0;
                used_random = true;
                break;
            case Instruction::Yield: {
                const std::uint64_t raw = tape_[(ptr_ + 1) % L] % (std::uint64_t{space_.reward_denominator} + 1);
                const std::uint64_t reward = enforce_budget_ ? std::min(raw, budget_) : raw;
                if (enforce_budget_) budget_ -= reward;
                emitted = Percept{cell % space_.observation_count, static_cast<std::uint32_t>(reward)};
                break;
            }
        }
        ++ip_;
        if (emitted) break;
    }
    if (ip_ >= n) halted_ = true;

    last_cycle_steps_ = steps;
    total_steps_ += steps;
    max_cycle_steps_ = std::max(max_cycle_steps_, steps);
    if (emitted) return *emitted;

    if (!halted_ && !used_random && ip_ == ip0 && ptr_ == ptr0 && tape_ == snapshot_) {
        if (read_action)
            silent_action_ = last_action_;
        else
            silent_any_action_ = true;
    }
    return {};
}

EnvironmentSource program_source(std::string id, const EnvProgram& program, const MachineConfig& machine,
                                 const SpaceConfig& space, bool enforce_budget) {
    EnvironmentSource src;
    src.id = std::move(id);
    src.space = space;
    src.summable = enforce_budget;
    src.make = [program, machine, space, enforce_budget](std::uint64_t seed) -> std::unique_ptr<Environment> {
        return std::make_unique<EnvProcess>(program, machine, space, seed, enforce_budget);
    };
    return src;
}

namespace {

void put_percept(std::string& out, const Percept& p) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((p.observation >> (8 * i)) & 0xFFu));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((p.reward_numerator >> (8 * i)) & 0xFFu));
}

// Number of percepts in a full subtree of the given depth below one node.
std::uint64_t subtree_percepts(std::uint64_t arity, std::size_t depth) {
    std::uint64_t total = 0, level = 1;
    for (std::size_t d = 0; d < depth; ++d) {
        level *= arity;
        total += level;
    }
    return total;
}

void signature_dfs(const EnvProcess& proc, std::size_t depth, std::uint32_t arity, std::string& out) {
    if (depth == 0) return;
    if (proc.halted()) {
        out.append(subtree_percepts(arity, depth) * 8, '\0');
        return;
    }
    for (std::uint32_t a = 0; a < arity; ++a) {
        EnvProcess child = proc;
        put_percept(out, child.step(Action{a}));
        signature_dfs(child, depth - 1, arity, out);
    }
}

}  // namespace

std::string behavior_signature(const EnvProgram& p, std::size_t horizon, const SpaceConfig& space,
                               const MachineConfig& machine, SignatureLimits limits) {
    if (horizon < 1) throw std::invalid_argument("signature horizon must be >= 1");
    std::uint64_t sequences = 1;
    for (std::size_t i = 0; i < horizon; ++i) {
        sequences *= space.action_count;
        if (sequences > limits.max_sequences)
            throw std::invalid_argument("signature horizon " + std::to_string(horizon) +
                                        " exceeds the exhaustiveness cap");
    }
    EnvProcess root(p, machine, space, derive_seed(0, {stream::signature}));
    std::string out;
    put_percept(out, root.step(std::nullopt));
    signature_dfs(root, horizon, space.action_count, out);
    return out;
}

std::uint64_t execution_steps(const EnvProgram& p, std::size_t cycles, const SpaceConfig& space,
                              const MachineConfig& machine) {
    EnvProcess proc(p, machine, space, derive_seed(0, {stream::signature}));
    std::uint64_t steps = 0;
    for (std::size_t c = 0; c < cycles; ++c) {
        proc.step(c == 0 ? std::nullopt : std::optional<Action>(Action{0}));
        steps += proc.last_cycle_steps();
        if (proc.halted()) break;
    }
    return std::max<std::uint64_t>(steps, 1);
}

}  // namespace upsilon
