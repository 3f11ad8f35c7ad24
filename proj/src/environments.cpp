#include "upsilon/environments.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace upsilon {

NativeEnvironment::NativeEnvironment(std::string identifier, SpaceConfig space, bool summable)
    : identifier_(std::move(identifier)), space_(space), summable_(summable), budget_(space.reward_denominator) {
    space_.validate();
}

bool NativeEnvironment::reward_exhausted() const {
    return (summable_ && budget_ == 0) || (cycle_ > 0 && silent_after(cycle_));
}

Percept NativeEnvironment::step(std::optional<Action> action) {
    if (cycle_ == 0) {
        if (action) throw ProtocolError("the first cycle takes no action");
    } else {
        if (!action) throw ProtocolError("an action is required after the first cycle");
        if (action->index >= space_.action_count) throw std::out_of_range("action out of range");
        actions_.push_back(*action);
    }
    ++cycle_;
    Percept p = transition(cycle_, actions_);
    if (summable_) {
        const std::uint64_t r = std::min<std::uint64_t>(p.reward_numerator, budget_);
        budget_ -= r;
        p.reward_numerator = static_cast<std::uint32_t>(r);
    }
    return p;
}

namespace {

class CopyEnvironment final : public NativeEnvironment {
public:
    explicit CopyEnvironment(SpaceConfig space) : NativeEnvironment("copy", space, false) {}

protected:
    Percept transition(std::size_t cycle, const std::vector<Action>& actions) override {
        if (cycle == 1) return {0, 0};
        return {0, actions.back().index == 1 ? space().reward_denominator : 0};
    }
    bool silent_after(std::size_t) const override { return false; }
};

class ConstantEnvironment final : public NativeEnvironment {
public:
    ConstantEnvironment(std::vector<std::uint32_t> schedule, SpaceConfig space, bool summable)
        : NativeEnvironment("constant", space, summable), schedule_(std::move(schedule)) {}

protected:
    Percept transition(std::size_t cycle, const std::vector<Action>&) override {
        return {0, cycle <= schedule_.size() ? schedule_[cycle - 1] : 0};
    }
    bool silent_after(std::size_t cycle) const override { return cycle >= schedule_.size(); }

private:
    std::vector<std::uint32_t> schedule_;
};

class PatternEnvironment final : public NativeEnvironment {
public:
    PatternEnvironment(std::uint32_t period, std::uint32_t window, SpaceConfig space)
        : NativeEnvironment("pattern", space, true), period_(period), window_(window) {}

protected:
    Percept transition(std::size_t cycle, const std::vector<Action>& actions) override {
        const std::size_t k = cycle - 1;  // index of the action just taken
        if (k < 2) return {0, 0};
        const bool match = actions[k - 2].index == target(k - 1) && actions[k - 1].index == target(k);
        return {0, match ? pattern_payout(space().reward_denominator, window_, k) : 0};
    }
    bool silent_after(std::size_t cycle) const override {
        // Payouts only shrink with k; once zero they stay zero.
        return cycle >= 2 && pattern_payout(space().reward_denominator, window_, cycle) == 0;
    }

private:
    std::uint32_t target(std::size_t j) const { return (j - 1) % period_ == 0 ? 1 : 0; }

    std::uint32_t period_;
    std::uint32_t window_;
};

}  // namespace

std::uint32_t pattern_payout(std::uint32_t reward_denominator, std::uint32_t window, std::size_t k) {
    if (k < 2) return 0;
    const std::size_t block = (k - 2) / window;
    if (block >= 32) return 0;  // divisor exceeds any 32-bit denominator
    const std::uint64_t divisor = std::uint64_t{window} << (block + 1);
    return static_cast<std::uint32_t>(reward_denominator / divisor);
}

EnvironmentSource make_copy_env(const SpaceConfig& cfg) {
    if (cfg.action_count != 2) throw std::invalid_argument("the copy environment needs a binary action space");
    cfg.validate();
    SpaceConfig space = cfg;
    space.observation_count = 1;
    return EnvironmentSource{"copy", space, false,
                             [space](std::uint64_t) -> std::unique_ptr<Environment> {
                                 return std::make_unique<CopyEnvironment>(space);
                             }};
}

EnvironmentSource make_constant_env(std::vector<std::uint32_t> schedule, const SpaceConfig& cfg, bool summable) {
    cfg.validate();
    const std::uint64_t total = std::accumulate(schedule.begin(), schedule.end(), std::uint64_t{0});
    for (std::uint32_t r : schedule)
        if (r > cfg.reward_denominator) throw std::invalid_argument("schedule reward exceeds the denominator");
    if (summable && total > cfg.reward_denominator)
        throw std::invalid_argument("schedule total " + std::to_string(total) + " exceeds the reward budget " +
                                    std::to_string(cfg.reward_denominator));
    return EnvironmentSource{"constant", cfg, summable,
                             [schedule = std::move(schedule), cfg, summable](std::uint64_t) -> std::unique_ptr<Environment> {
                                 return std::make_unique<ConstantEnvironment>(schedule, cfg, summable);
                             }};
}

EnvironmentSource make_pattern_env(std::uint32_t period, const SpaceConfig& cfg, std::uint32_t window) {
    if (period < 1) throw std::invalid_argument("pattern period must be >= 1");
    if (window < 1) throw std::invalid_argument("pattern window must be >= 1");
    if (cfg.action_count < 2) throw std::invalid_argument("the pattern environment needs at least two actions");
    cfg.validate();
    return EnvironmentSource{"pattern" + std::to_string(period), cfg, true,
                             [period, window, cfg](std::uint64_t) -> std::unique_ptr<Environment> {
                                 return std::make_unique<PatternEnvironment>(period, window, cfg);
                             }};
}

EnvironmentSource Fixture::program_source(const MachineConfig& machine) const {
    return upsilon::program_source("fixture:" + name, program, machine, space, enforce_budget);
}

std::vector<std::string> fixture_names() { return {"zero", "unit", "copy"}; }

Fixture compile_fixture(std::string_view name, const MachineConfig& machine) {
    Fixture f;
    f.name = std::string(name);
    std::string listing;
    if (name == "zero") {
        f.space = SpaceConfig{};
        f.native = make_constant_env({}, f.space);
    } else if (name == "unit") {
        // tape[0] = 255, then yield from the wrapped-around cell to its left.
        listing = "-<!";
        f.space = SpaceConfig{};
        f.native = make_constant_env({f.space.reward_denominator}, f.space);
    } else if (name == "copy") {
        // cell0: loop flag; cell1: reward = -a mod 256; cell2: scratch action.
        listing = "+[>[-]>,[-<->]<<!]";
        f.native = make_copy_env(SpaceConfig{});
        f.space = f.native.space;
        f.enforce_budget = false;
    } else {
        throw std::invalid_argument("unknown fixture '" + std::string(name) + "'");
    }
    if (machine.cell_modulus != f.space.reward_denominator + 1 && !listing.empty())
        throw std::invalid_argument("fixture '" + f.name + "' assumes cell_modulus = D + 1");
    const auto instructions = parse_listing(listing);
    f.program = decode_program(encode_program(instructions, machine), machine);
    return f;
}

}  // namespace upsilon
