#pragma once

// Agents: conditional distributions over actions given the history.

#include "upsilon/interaction.hpp"
#include "upsilon/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace upsilon {

using ActionDistribution = std::vector<double>;

/// A rollout could not be completed because the agent broke the protocol.
/// Valuation records such rollouts as failed instead of scoring them.
class AgentFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Index drawn from a normalized distribution.
Action sample_action(const ActionDistribution& dist, Rng& rng);

class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string name() const = 0;
    /// Called once before the first percept of each episode.
    virtual void begin_episode(std::uint64_t /*episode*/) {}
    /// Choose a_k given a history ending in percept k.
    virtual Action act(const History& h, Rng& rng) = 0;
    /// Update hook, called after each percept is appended.
    virtual void observe(const History& /*h*/) {}
};

/// An agent whose choice is an explicit distribution.
class PolicyAgent : public Agent {
public:
    virtual ActionDistribution policy(const History& h) const = 0;
    Action act(const History& h, Rng& rng) override { return sample_action(policy(h), rng); }
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

/// Named factory, one fresh agent per rollout.
struct AgentSpec {
    std::string name;
    AgentFactory make;
    /// Spaces the agent was built for; checked against the environment.
    std::optional<SpaceConfig> space;
};

/// Uniform over actions at every history.
class RandomAgent final : public PolicyAgent {
public:
    explicit RandomAgent(SpaceConfig space) : space_(space) {}
    std::string name() const override { return "rand"; }
    ActionDistribution policy(const History& h) const override;

private:
    SpaceConfig space_;
};

/// Epsilon-greedy on the running mean of the next cycle's reward, kept per
/// (history_key(h, depth), action). Unseen keys act uniformly; greedy ties go
/// to the lowest action index.
class TableAgent final : public PolicyAgent {
public:
    struct Stat {
        double sum = 0.0;
        std::uint64_t count = 0;
        double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
    };
    using Table = std::map<std::string, std::vector<Stat>>;

    TableAgent(std::string name, SpaceConfig space, std::size_t depth, double epsilon);

    std::string name() const override { return name_; }
    void begin_episode(std::uint64_t) override { table_.clear(); }
    ActionDistribution policy(const History& h) const override;
    void observe(const History& h) override;

    std::size_t depth() const { return depth_; }
    double epsilon() const { return epsilon_; }
    const Table& table() const { return table_; }

private:
    std::string name_;
    SpaceConfig space_;
    std::size_t depth_;
    double epsilon_;
    Table table_;
};

std::unique_ptr<TableAgent> basic_agent(const SpaceConfig& cfg, double epsilon = 0.10);
std::unique_ptr<TableAgent> kback_agent(const SpaceConfig& cfg, std::size_t k, double epsilon = 0.10);
std::unique_ptr<RandomAgent> random_agent(const SpaceConfig& cfg);

/// Three fixed policies for the binary copy example, keyed by the cycle
/// index k of the action being chosen.
class ScriptedAgent final : public PolicyAgent {
public:
    enum class Kind { Optimal, Uniform, Piecewise };

    explicit ScriptedAgent(Kind kind) : kind_(kind) {}
    std::string name() const override;
    ActionDistribution policy(const History& h) const override;

    /// Distribution for the action of cycle k.
    ActionDistribution policy_at(std::size_t k) const;

private:
    Kind kind_;
};

struct ScriptedAgents {
    std::unique_ptr<ScriptedAgent> optimal;    // always action 1
    std::unique_ptr<ScriptedAgent> uniform;    // 1/2 each
    std::unique_ptr<ScriptedAgent> piecewise;  // 0 for k <= 100, 1 for k <= 5000, then uniform
};

ScriptedAgents scripted_agents();

/// Factories for the built-in roster: rand, basic, 2back, kback:<k>, opt,
/// uniform, piecewise. Throws std::invalid_argument for unknown names.
AgentSpec builtin_agent(const std::string& name, const SpaceConfig& cfg);
std::vector<std::string> builtin_agent_names();

}  // namespace upsilon
