#pragma once

// Value of one agent in one environment: geometric-discounted, harmonic and
// summable (total reward) forms, estimated by seeded Monte Carlo rollouts.

#include "upsilon/agents.hpp"
#include "upsilon/environment.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace upsilon {

enum class ValueMode { Discounted, Harmonic, Summable };

std::string_view mode_name(ValueMode mode);

struct ValuationParams {
    ValueMode mode = ValueMode::Summable;
    double gamma = 0.9;
    /// Largest number of cycles in one episode (T_max).
    std::size_t horizon = 1000;
    std::size_t episodes = 100;
    double trunc_epsilon = 1e-3;
    double confidence = 0.95;
    std::uint64_t seed = 0;
    /// Mixed into every per-episode seed; the ensemble layer sets it to the
    /// program id so environments draw from disjoint streams.
    std::uint64_t environment_stream = 0;

    void validate() const;
};

struct ValueEstimate {
    double mean = 0.0;
    double ci_half_width = 0.0;
    std::size_t episodes_used = 0;
    std::size_t failed_episodes = 0;
    /// Upper bound on the value mass cut off by stopping at the horizon.
    double truncation_bound = 0.0;
    /// Per-episode values in episode order (failed episodes omitted).
    std::vector<double> episode_values;
    /// Episode index of each entry in episode_values.
    std::vector<std::uint32_t> episode_ids;
};

/// Gamma = sum_{i>=1} gamma^i = gamma / (1 - gamma).
double gamma_norm(double gamma);

/// Cycles needed so the ignored discounted tail is at most epsilon.
std::size_t discounted_cycles(double gamma, double epsilon, std::size_t horizon);
std::size_t harmonic_cycles(double epsilon, std::size_t horizon);

ValueEstimate discounted_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params);
ValueEstimate harmonic_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params);
ValueEstimate summable_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params);

/// Dispatches on params.mode.
ValueEstimate estimate_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params);

/// Value of a single episode under params.mode (the unit the mixture
/// estimator samples). Throws AgentFailure when the agent breaks protocol.
double episode_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params,
                     std::uint64_t episode, double* remaining_fraction = nullptr);

/// Mean reward per cycle, k = 1..cycles, over `episodes` rollouts.
std::vector<double> per_cycle_reward_profile(const AgentSpec& agent, const EnvironmentSource& env, std::size_t cycles,
                                             std::size_t episodes, std::uint64_t seed);

/// Observer for a raw rollout: cycle (1-based), percept, remaining budget.
/// Return false to stop the episode.
using PerceptObserver = std::function<bool(std::size_t, const Percept&, const Environment&)>;

/// Runs one episode of at most `cycles` cycles with the given seeds.
/// Returns the number of cycles executed.
std::size_t rollout(Agent& agent, Environment& env, Rng& agent_rng, std::size_t cycles, std::uint64_t episode,
                    const PerceptObserver& observer);

}  // namespace upsilon
