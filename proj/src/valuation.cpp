#include "upsilon/valuation.hpp"

#include "upsilon/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace upsilon {

std::string_view mode_name(ValueMode mode) {
    switch (mode) {
        case ValueMode::Discounted: return "discounted";
        case ValueMode::Harmonic: return "harmonic";
        case ValueMode::Summable: return "summable";
    }
    return "?";
}

void ValuationParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must lie in (0, 1)");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (!(trunc_epsilon > 0.0 && trunc_epsilon < 1.0))
        throw std::invalid_argument("truncation epsilon must lie in (0, 1)");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
}

double gamma_norm(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    return gamma / (1.0 - gamma);
}

std::size_t discounted_cycles(double gamma, double epsilon, std::size_t horizon) {
    // Normalized tail beyond T is gamma^T.
    const double needed = std::ceil(std::log(epsilon) / std::log(gamma));
    if (!(needed < static_cast<double>(horizon))) return horizon;
    return std::max<std::size_t>(1, static_cast<std::size_t>(needed));
}

std::size_t harmonic_cycles(double epsilon, std::size_t horizon) {
    // Normalized tail beyond T is at most (6 / pi^2) / T.
    const double needed = std::ceil(6.0 / (std::numbers::pi * std::numbers::pi * epsilon));
    if (!(needed < static_cast<double>(horizon))) return horizon;
    return std::max<std::size_t>(1, static_cast<std::size_t>(needed));
}

std::size_t rollout(Agent& agent, Environment& env, Rng& agent_rng, std::size_t cycles, std::uint64_t episode,
                    const PerceptObserver& observer) {
    History h(env.space());
    agent.begin_episode(episode);
    Percept p = env.step(std::nullopt);
    h.push_percept(p);
    agent.observe(h);
    if (!observer(1, p, env)) return 1;
    for (std::size_t k = 2; k <= cycles; ++k) {
        const Action a = agent.act(h, agent_rng);
        h.push_action(a);
        p = env.step(a);
        h.push_percept(p);
        agent.observe(h);
        if (!observer(k, p, env)) return k;
    }
    return cycles;
}

namespace {

void check_compatible(const AgentSpec& agent, const EnvironmentSource& env) {
    if (agent.space && !(*agent.space == env.space))
        throw std::invalid_argument("agent '" + agent.name + "' and environment '" + env.id +
                                    "' use incompatible spaces");
}

void check_mode(const ValuationParams& params, ValueMode expected) {
    if (params.mode != expected)
        throw std::invalid_argument("valuation mode mismatch: expected " + std::string(mode_name(expected)) +
                                    ", got " + std::string(mode_name(params.mode)));
}

ValueEstimate estimate(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params) {
    params.validate();
    check_compatible(agent, env);
    if (params.mode == ValueMode::Summable && !env.summable)
        throw std::invalid_argument("environment '" + env.id + "' is not reward-summable");

    ValueEstimate out;
    CompensatedSum remaining;
    for (std::size_t ep = 0; ep < params.episodes; ++ep) {
        double left = 0.0;
        try {
            const double v = episode_value(agent, env, params, ep, &left);
            out.episode_values.push_back(v);
            out.episode_ids.push_back(static_cast<std::uint32_t>(ep));
            remaining.add(left);
        } catch (const AgentFailure&) {
            ++out.failed_episodes;
        }
    }
    out.episodes_used = out.episode_values.size();
    const auto mi = mean_interval(out.episode_values, params.confidence,
                                  derive_seed(params.seed, {stream::bootstrap, params.environment_stream}));
    out.mean = mi.mean;
    out.ci_half_width = mi.half_width;

    switch (params.mode) {
        case ValueMode::Discounted:
            out.truncation_bound = std::pow(params.gamma, static_cast<double>(
                                                              discounted_cycles(params.gamma, params.trunc_epsilon,
                                                                                params.horizon)));
            break;
        case ValueMode::Harmonic:
            out.truncation_bound = 6.0 / (std::numbers::pi * std::numbers::pi *
                                          static_cast<double>(harmonic_cycles(params.trunc_epsilon, params.horizon)));
            break;
        case ValueMode::Summable:
            out.truncation_bound =
                params.trunc_epsilon +
                (out.episodes_used == 0 ? 0.0 : remaining.value() / static_cast<double>(out.episodes_used));
            break;
    }
    return out;
}

}  // namespace

double episode_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params,
                     std::uint64_t episode, double* remaining_fraction) {
    const std::uint64_t env_seed = derive_seed(params.seed, {stream::environment, params.environment_stream, episode});
    const std::uint64_t agent_seed = derive_seed(params.seed, {stream::agent, params.environment_stream, episode});
    auto e = env.make(env_seed);
    auto a = agent.make();
    Rng rng(agent_seed);
    const double D = static_cast<double>(env.space.reward_denominator);
    if (remaining_fraction) *remaining_fraction = 0.0;

    switch (params.mode) {
        case ValueMode::Discounted: {
            const double gamma = params.gamma;
            const std::size_t T = discounted_cycles(gamma, params.trunc_epsilon, params.horizon);
            CompensatedSum s;
            rollout(*a, *e, rng, T, episode, [&](std::size_t k, const Percept& p, const Environment&) {
                if (p.reward_numerator != 0)
                    s.add(std::pow(gamma, static_cast<double>(k)) * (p.reward_numerator / D));
                return true;
            });
            return s.value() * ((1.0 - gamma) / gamma);
        }
        case ValueMode::Harmonic: {
            const std::size_t T = harmonic_cycles(params.trunc_epsilon, params.horizon);
            CompensatedSum s;
            rollout(*a, *e, rng, T, episode, [&](std::size_t k, const Percept& p, const Environment&) {
                if (p.reward_numerator != 0) {
                    const double t = static_cast<double>(k);
                    s.add((p.reward_numerator / D) / (t * t));
                }
                return true;
            });
            return s.value() * (6.0 / (std::numbers::pi * std::numbers::pi));
        }
        case ValueMode::Summable: {
            std::uint64_t total = 0;
            const double floor_budget = params.trunc_epsilon * D;
            bool stopped_early = false;
            rollout(*a, *e, rng, params.horizon, episode, [&](std::size_t, const Percept& p, const Environment& env_now) {
                total += p.reward_numerator;
                if (env_now.reward_exhausted() || static_cast<double>(env_now.remaining_budget()) < floor_budget) {
                    stopped_early = true;
                    return false;
                }
                return true;
            });
            if (!stopped_early && remaining_fraction)
                *remaining_fraction = static_cast<double>(e->remaining_budget()) / D;
            return static_cast<double>(total) / D;
        }
    }
    return 0.0;
}

ValueEstimate discounted_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params) {
    check_mode(params, ValueMode::Discounted);
    return estimate(agent, env, params);
}

ValueEstimate harmonic_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params) {
    check_mode(params, ValueMode::Harmonic);
    return estimate(agent, env, params);
}

ValueEstimate summable_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params) {
    check_mode(params, ValueMode::Summable);
    return estimate(agent, env, params);
}

ValueEstimate estimate_value(const AgentSpec& agent, const EnvironmentSource& env, const ValuationParams& params) {
    return estimate(agent, env, params);
}

std::vector<double> per_cycle_reward_profile(const AgentSpec& agent, const EnvironmentSource& env, std::size_t cycles,
                                             std::size_t episodes, std::uint64_t seed) {
    if (cycles < 1) throw std::invalid_argument("profile needs at least one cycle");
    check_compatible(agent, env);
    std::vector<double> sums(cycles, 0.0);
    const double D = static_cast<double>(env.space.reward_denominator);
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto e = env.make(derive_seed(seed, {stream::environment, 0, ep}));
        auto a = agent.make();
        Rng rng(derive_seed(seed, {stream::agent, 0, ep}));
        rollout(*a, *e, rng, cycles, ep, [&](std::size_t k, const Percept& p, const Environment&) {
            sums[k - 1] += p.reward_numerator / D;
            return true;
        });
    }
    for (double& s : sums) s /= static_cast<double>(std::max<std::size_t>(episodes, 1));
    return sums;
}

}  // namespace upsilon
