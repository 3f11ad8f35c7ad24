#include "doctest.h"

#include "upsilon/agents.hpp"

#include <cmath>
#include <map>
#include <numeric>

using namespace upsilon;

namespace {

History make_history(const std::vector<Percept>& ps, const std::vector<std::uint32_t>& as, SpaceConfig s = {}) {
    History h(s);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        h.push_percept(ps[i]);
        if (i < as.size()) h.push_action(Action{as[i]});
    }
    return h;
}

double total(const ActionDistribution& d) { return std::accumulate(d.begin(), d.end(), 0.0); }

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("random agent is uniform") {
    RandomAgent r(SpaceConfig{4, 2, 255});
    const auto d = r.policy(make_history({{0, 0}}, {}, SpaceConfig{4, 2, 255}));
    REQUIRE(d.size() == 4);
    for (double p : d) CHECK(p == 0.25);

    Rng rng(9);
    std::map<std::uint32_t, int> counts;
    const auto h = make_history({{0, 0}}, {}, SpaceConfig{4, 2, 255});
    for (int i = 0; i < 40000; ++i) counts[r.act(h, rng).index]++;
    for (auto [a, c] : counts) CHECK(std::abs(c / 40000.0 - 0.25) < 0.01);
}

TEST_CASE("sample_action follows the distribution") {
    Rng rng(4);
    const ActionDistribution d{0.1, 0.0, 0.9};
    int ones = 0, twos = 0;
    for (int i = 0; i < 50000; ++i) {
        const auto a = sample_action(d, rng).index;
        CHECK(a != 1);
        ones += a == 0;
        twos += a == 2;
    }
    CHECK(std::abs(ones / 50000.0 - 0.1) < 0.01);
    CHECK(ones + twos == 50000);
}

TEST_CASE("epsilon-greedy mass") {
    auto agent = basic_agent(SpaceConfig{});
    // action 1 after observation 0 paid, action 0 did not
    History h(SpaceConfig{});
    h.push_percept({0, 0});
    h.push_action(Action{1});
    h.push_percept({0, 200});
    agent->observe(h);
    h.push_action(Action{0});
    h.push_percept({0, 0});
    agent->observe(h);
    const auto d = agent->policy(h);
    CHECK(total(d) == doctest::Approx(1.0));
    CHECK(d[1] == doctest::Approx(0.95));
    CHECK(d[0] == doctest::Approx(0.05));

    // unseen key: uniform
    const auto fresh = agent->policy(make_history({{1, 0}}, {}));
    CHECK(fresh[0] == 0.5);
    CHECK(fresh[1] == 0.5);
}

TEST_CASE("greedy ties go to the lowest action") {
    auto agent = kback_agent(SpaceConfig{3, 2, 255}, 1, 0.0);
    History h(SpaceConfig{3, 2, 255});
    h.push_percept({0, 0});
    h.push_action(Action{2});
    h.push_percept({1, 0});
    agent->observe(h);
    // key for cycle 1 has seen action 2 with mean 0; actions 0 and 1 unseen count as 0
    const auto d = agent->policy(make_history({{0, 0}}, {}, SpaceConfig{3, 2, 255}));
    CHECK(d[0] == 1.0);
}

TEST_CASE("table replays an independent running-mean oracle") {
    const SpaceConfig s{2, 2, 10};
    for (std::size_t depth : {0u, 1u, 2u}) {
        auto agent = kback_agent(s, depth, 0.2);
        std::map<std::string, std::map<std::uint32_t, std::pair<double, int>>> oracle;
        Rng rng(depth + 17);
        History h(s);
        h.push_percept({0, 0});
        for (int k = 0; k < 400; ++k) {
            const std::string key = history_key(h, depth);
            const auto a = static_cast<std::uint32_t>(rng.below(2));
            h.push_action(Action{a});
            const Percept p{static_cast<std::uint32_t>(rng.below(2)), static_cast<std::uint32_t>(rng.below(11))};
            h.push_percept(p);
            agent->observe(h);
            auto& slot = oracle[key][a];
            slot.first += p.reward(s);
            slot.second += 1;
        }
        for (const auto& [key, per_action] : oracle) {
            const auto it = agent->table().find(key);
            REQUIRE(it != agent->table().end());
            for (const auto& [a, st] : per_action) {
                CHECK(it->second[a].count == static_cast<std::uint64_t>(st.second));
                CHECK(it->second[a].mean() == doctest::Approx(st.first / st.second));
            }
        }
        CHECK(agent->table().size() == oracle.size());
    }
}

TEST_CASE("depth 0 is the basic agent") {
    const SpaceConfig s;
    auto basic = basic_agent(s);
    auto k0 = kback_agent(s, 0);
    CHECK(basic->depth() == 0);
    Rng rng(2);
    History h(s);
    h.push_percept({0, 0});
    for (int k = 0; k < 200; ++k) {
        CHECK(basic->policy(h) == k0->policy(h));
        h.push_action(Action{static_cast<std::uint32_t>(rng.below(2))});
        h.push_percept({static_cast<std::uint32_t>(rng.below(2)), static_cast<std::uint32_t>(rng.below(256))});
        basic->observe(h);
        k0->observe(h);
    }
    REQUIRE(basic->table().size() == k0->table().size());
    for (const auto& [key, stats] : basic->table())
        for (std::size_t a = 0; a < stats.size(); ++a) {
            CHECK(stats[a].count == k0->table().at(key)[a].count);
            CHECK(stats[a].sum == k0->table().at(key)[a].sum);
        }
}

TEST_CASE("begin_episode clears the table") {
    auto agent = basic_agent(SpaceConfig{});
    History h(SpaceConfig{});
    h.push_percept({0, 0});
    h.push_action(Action{1});
    h.push_percept({0, 9});
    agent->observe(h);
    CHECK_FALSE(agent->table().empty());
    agent->begin_episode(1);
    CHECK(agent->table().empty());
}

TEST_CASE("scripted policies") {
    const auto s = scripted_agents();
    for (std::size_t k : {1u, 2u, 100u, 5000u, 9999u}) {
        CHECK(s.optimal->policy_at(k) == ActionDistribution{0.0, 1.0});
        CHECK(s.uniform->policy_at(k) == ActionDistribution{0.5, 0.5});
    }
    CHECK(s.piecewise->policy_at(1) == ActionDistribution{1.0, 0.0});
    CHECK(s.piecewise->policy_at(100) == ActionDistribution{1.0, 0.0});
    CHECK(s.piecewise->policy_at(101) == ActionDistribution{0.0, 1.0});
    CHECK(s.piecewise->policy_at(5000) == ActionDistribution{0.0, 1.0});
    CHECK(s.piecewise->policy_at(5001) == ActionDistribution{0.5, 0.5});
}

TEST_CASE("builtin roster") {
    for (const auto& name : builtin_agent_names()) {
        if (name.find('<') != std::string::npos) continue;
        const auto spec = builtin_agent(name, SpaceConfig{});
        CHECK(spec.make()->name() == spec.name);
    }
    CHECK(builtin_agent("kback:3", SpaceConfig{}).make()->name() == "3back");
    CHECK_THROWS_AS(builtin_agent("nope", SpaceConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_agent("kback:x", SpaceConfig{}), std::invalid_argument);
}

}
