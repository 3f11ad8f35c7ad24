#pragma once

// Hand-coded environments and the reference-machine fixtures that mirror them.

#include "upsilon/environment.hpp"
#include "upsilon/machine.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace upsilon {

/// Base for hand-coded environments: enforces the turn order and, when
/// summable, the integer reward budget.
class NativeEnvironment : public Environment {
public:
    NativeEnvironment(std::string identifier, SpaceConfig space, bool summable);

    const std::string& identifier() const { return identifier_; }
    const SpaceConfig& space() const override { return space_; }
    bool summable() const override { return summable_; }
    std::uint64_t remaining_budget() const override { return budget_; }
    bool reward_exhausted() const override;

    Percept step(std::optional<Action> action) final;

protected:
    /// Percept for cycle `cycle` (1-based); `actions` holds a_1 .. a_{cycle-1}.
    virtual Percept transition(std::size_t cycle, const std::vector<Action>& actions) = 0;
    /// No reward will ever follow cycle `cycle`.
    virtual bool silent_after(std::size_t cycle) const = 0;

private:
    std::string identifier_;
    SpaceConfig space_;
    bool summable_;
    std::uint64_t budget_;
    std::vector<Action> actions_;
    std::size_t cycle_ = 0;
};

/// r_1 = 0, r_k = a_{k-1} (as 0 or 1), observation always 0. Not summable.
/// The returned space has a single observation symbol.
EnvironmentSource make_copy_env(const SpaceConfig& cfg);

/// Emits the numerators in order, then zeros, whatever the agent does.
/// Throws std::invalid_argument when summable and the schedule exceeds D.
EnvironmentSource make_constant_env(std::vector<std::uint32_t> schedule, const SpaceConfig& cfg = {},
                                    bool summable = true);

/// Pair-pattern environment. The target action at step j is 1 when
/// (j - 1) mod period == 0, else 0. After action a_k (k >= 2) the next
/// percept pays floor(D / (window * 2^(b+1))) with b = (k - 2) / window if
/// (a_{k-1}, a_k) equals the target pair, else 0. Observation always 0.
EnvironmentSource make_pattern_env(std::uint32_t period, const SpaceConfig& cfg = {}, std::uint32_t window = 16);

/// Payout for a matched pair ending at action index k (k >= 2).
std::uint32_t pattern_payout(std::uint32_t reward_denominator, std::uint32_t window, std::size_t k);

/// A reference-machine program paired with the native environment it mirrors.
struct Fixture {
    std::string name;
    EnvProgram program;
    SpaceConfig space;
    /// Run the program with the summability cap (false only for non-summable natives).
    bool enforce_budget = true;
    /// Action-sequence length up to which program and native agree exhaustively.
    std::size_t horizon = 10;
    EnvironmentSource native;

    EnvironmentSource program_source(const MachineConfig& machine) const;
};

std::vector<std::string> fixture_names();

/// Throws std::invalid_argument for an unknown name.
Fixture compile_fixture(std::string_view name, const MachineConfig& machine = {});

}  // namespace upsilon
