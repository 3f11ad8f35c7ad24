#include "upsilon/agents.hpp"

#include <charconv>
#include <stdexcept>

namespace upsilon {

Action sample_action(const ActionDistribution& dist, Rng& rng) {
    const double u = rng.unit();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return Action{static_cast<std::uint32_t>(i)};
    }
    // Rounding left u above the accumulated mass: take the last supported action.
    for (std::size_t i = dist.size(); i-- > 0;)
        if (dist[i] > 0.0) return Action{static_cast<std::uint32_t>(i)};
    throw std::invalid_argument("sample_action: empty distribution");
}

ActionDistribution RandomAgent::policy(const History&) const {
    return ActionDistribution(space_.action_count, 1.0 / space_.action_count);
}

TableAgent::TableAgent(std::string name, SpaceConfig space, std::size_t depth, double epsilon)
    : name_(std::move(name)), space_(space), depth_(depth), epsilon_(epsilon) {
    space_.validate();
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
}

ActionDistribution TableAgent::policy(const History& h) const {
    const std::size_t n = space_.action_count;
    const double share = 1.0 / static_cast<double>(n);
    auto it = table_.find(history_key(h, depth_));
    if (it == table_.end()) return ActionDistribution(n, share);

    const auto& stats = it->second;
    std::size_t best = 0;
    for (std::size_t a = 1; a < n; ++a)
        if (stats[a].mean() > stats[best].mean()) best = a;

    ActionDistribution dist(n, epsilon_ * share);
    dist[best] = 1.0 - epsilon_ + epsilon_ * share;
    return dist;
}

void TableAgent::observe(const History& h) {
    const std::size_t k = h.cycle_count();
    if (k < 2) return;
    auto& stats = table_[history_key_at(h, depth_, k - 1)];
    if (stats.empty()) stats.resize(space_.action_count);
    Stat& s = stats[h.action(k - 1).index];
    s.sum += h.percept(k).reward(space_);
    ++s.count;
}

std::unique_ptr<TableAgent> basic_agent(const SpaceConfig& cfg, double epsilon) {
    return std::make_unique<TableAgent>("basic", cfg, 0, epsilon);
}

std::unique_ptr<TableAgent> kback_agent(const SpaceConfig& cfg, std::size_t k, double epsilon) {
    return std::make_unique<TableAgent>(std::to_string(k) + "back", cfg, k, epsilon);
}

std::unique_ptr<RandomAgent> random_agent(const SpaceConfig& cfg) { return std::make_unique<RandomAgent>(cfg); }

std::string ScriptedAgent::name() const {
    switch (kind_) {
        case Kind::Optimal: return "opt";
        case Kind::Uniform: return "uniform";
        case Kind::Piecewise: return "piecewise";
    }
    return "?";
}

ActionDistribution ScriptedAgent::policy_at(std::size_t k) const {
    switch (kind_) {
        case Kind::Optimal: return {0.0, 1.0};
        case Kind::Uniform: return {0.5, 0.5};
        case Kind::Piecewise:
            if (k <= 100) return {1.0, 0.0};
            if (k <= 5000) return {0.0, 1.0};
            return {0.5, 0.5};
    }
    return {0.5, 0.5};
}

ActionDistribution ScriptedAgent::policy(const History& h) const {
    if (h.space().action_count != 2) throw std::invalid_argument("scripted agents need binary actions");
    return policy_at(h.cycle_count());
}

ScriptedAgents scripted_agents() {
    return {std::make_unique<ScriptedAgent>(ScriptedAgent::Kind::Optimal),
            std::make_unique<ScriptedAgent>(ScriptedAgent::Kind::Uniform),
            std::make_unique<ScriptedAgent>(ScriptedAgent::Kind::Piecewise)};
}

std::vector<std::string> builtin_agent_names() {
    return {"rand", "basic", "2back", "kback:<k>", "opt", "uniform", "piecewise"};
}

AgentSpec builtin_agent(const std::string& name, const SpaceConfig& cfg) {
    if (name == "rand") return {name, [cfg] { return std::unique_ptr<Agent>(random_agent(cfg)); }, cfg};
    if (name == "basic") return {name, [cfg] { return std::unique_ptr<Agent>(basic_agent(cfg)); }, cfg};
    if (name == "2back") return {name, [cfg] { return std::unique_ptr<Agent>(kback_agent(cfg, 2)); }, cfg};
    if (name.rfind("kback:", 0) == 0) {
        std::size_t k = 0;
        const char* first = name.data() + 6;
        const char* last = name.data() + name.size();
        auto [ptr, ec] = std::from_chars(first, last, k);
        if (ec != std::errc{} || ptr != last || first == last)
            throw std::invalid_argument("bad agent name '" + name + "'");
        return {name, [cfg, k] { return std::unique_ptr<Agent>(kback_agent(cfg, k)); }, cfg};
    }
    using Kind = ScriptedAgent::Kind;
    auto scripted = [&](Kind kind) -> AgentSpec {
        if (cfg.action_count != 2) throw std::invalid_argument("agent '" + name + "' needs binary actions");
        return {name, [kind] { return std::unique_ptr<Agent>(std::make_unique<ScriptedAgent>(kind)); }, cfg};
    };
    if (name == "opt") return scripted(Kind::Optimal);
    if (name == "uniform") return scripted(Kind::Uniform);
    if (name == "piecewise") return scripted(Kind::Piecewise);
    throw std::invalid_argument("unknown agent '" + name + "'");
}

}  // namespace upsilon
