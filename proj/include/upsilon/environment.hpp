#pragma once

#include "upsilon/interaction.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace upsilon {

/// An interactive environment process. The first call to step() takes no
/// action; every later call takes the agent's answer to the previous percept.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const SpaceConfig& space() const = 0;
    virtual Percept step(std::optional<Action> action) = 0;

    /// Whether total emitted reward is capped at one (numerator D).
    virtual bool summable() const = 0;
    /// Reward numerator still available under the cap (D for a fresh process).
    virtual std::uint64_t remaining_budget() const = 0;
    /// True once no future percept can carry a nonzero reward.
    virtual bool reward_exhausted() const = 0;
};

using EnvironmentFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

/// A named, seedable environment description: what the valuation and
/// ensemble layers consume.
struct EnvironmentSource {
    std::string id;
    SpaceConfig space;
    bool summable = true;
    EnvironmentFactory make;
};

}  // namespace upsilon
