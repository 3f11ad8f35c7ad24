#pragma once

// Spaces, messages and the turn discipline of the agent/environment protocol.
//
// The environment moves first: a history reads o1 r1 a1 o2 r2 a2 ... and a
// cycle is one percept plus (eventually) the action that answers it.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace upsilon {

class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct SpaceConfig {
    std::uint32_t action_count = 2;
    std::uint32_t observation_count = 2;
    std::uint32_t reward_denominator = 255;

    /// Throws std::invalid_argument when a count is zero.
    void validate() const;

    bool operator==(const SpaceConfig&) const = default;
};

struct Action {
    std::uint32_t index = 0;

    bool operator==(const Action&) const = default;
};

struct Percept {
    std::uint32_t observation = 0;
    std::uint32_t reward_numerator = 0;

    double reward(const SpaceConfig& space) const {
        return static_cast<double>(reward_numerator) / space.reward_denominator;
    }

    bool operator==(const Percept&) const = default;
};

/// Strictly alternating record of one interaction. Appends are checked
/// against the turn order and the configured spaces.
class History {
public:
    History() = default;
    explicit History(SpaceConfig space);

    const SpaceConfig& space() const { return space_; }

    /// Number of percepts received so far (k in o_k r_k).
    std::size_t cycle_count() const { return percepts_.size(); }
    bool expects_percept() const { return actions_.size() == percepts_.size(); }
    bool expects_action() const { return !expects_percept(); }
    bool empty() const { return percepts_.empty(); }

    /// 1-based, as in o_k r_k.
    const Percept& percept(std::size_t cycle) const { return percepts_.at(cycle - 1); }
    const Action& action(std::size_t cycle) const { return actions_.at(cycle - 1); }
    const Percept& last_percept() const { return percepts_.back(); }
    const Action& last_action() const { return actions_.back(); }

    const std::vector<Percept>& percepts() const { return percepts_; }
    const std::vector<Action>& actions() const { return actions_; }

    History append_percept(const Percept& p) const&;
    History append_percept(const Percept& p) &&;
    History append_action(const Action& a) const&;
    History append_action(const Action& a) &&;

    // In-place forms used by rollout loops.
    void push_percept(const Percept& p);
    void push_action(const Action& a);

private:
    SpaceConfig space_{};
    std::vector<Percept> percepts_;
    std::vector<Action> actions_;
};

/// Canonical key for the conditioning window ending at the current percept.
///
/// depth 0: the current observation only.
/// depth d >= 1: the current percept (o_k, r_k) plus the d preceding
/// (percept, action) pairs, o_{k-j} r_{k-j} a_{k-j} for j = 1..d. Slots before
/// the start of the history are encoded as absent.
std::string history_key(const History& h, std::size_t depth);

/// Same key, computed as if `cycle` were the current percept (1 <= cycle <= k).
std::string history_key_at(const History& h, std::size_t depth, std::size_t cycle);

}  // namespace upsilon
