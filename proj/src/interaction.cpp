#include "upsilon/interaction.hpp"

#include <utility>

namespace upsilon {

void SpaceConfig::validate() const {
    if (action_count < 1) throw std::invalid_argument("action_count must be >= 1");
    if (observation_count < 1) throw std::invalid_argument("observation_count must be >= 1");
    if (reward_denominator < 1) throw std::invalid_argument("reward_denominator must be >= 1");
}

History::History(SpaceConfig space) : space_(space) { space_.validate(); }

void History::push_percept(const Percept& p) {
    if (!expects_percept()) throw ProtocolError("percept out of turn: an action is expected");
    if (p.observation >= space_.observation_count)
        throw std::out_of_range("observation " + std::to_string(p.observation) + " out of range");
    if (p.reward_numerator > space_.reward_denominator)
        throw std::out_of_range("reward numerator " + std::to_string(p.reward_numerator) +
                                " exceeds denominator");
    percepts_.push_back(p);
}

void History::push_action(const Action& a) {
    if (!expects_action()) {
        throw ProtocolError(percepts_.empty() ? "action out of turn: the environment moves first"
                                              : "action out of turn: a percept is expected");
    }
    if (a.index >= space_.action_count)
        throw std::out_of_range("action " + std::to_string(a.index) + " out of range");
    actions_.push_back(a);
}

History History::append_percept(const Percept& p) const& {
    History copy = *this;
    copy.push_percept(p);
    return copy;
}

History History::append_percept(const Percept& p) && {
    push_percept(p);
    return std::move(*this);
}

History History::append_action(const Action& a) const& {
    History copy = *this;
    copy.push_action(a);
    return copy;
}

History History::append_action(const Action& a) && {
    push_action(a);
    return std::move(*this);
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

std::string history_key_at(const History& h, std::size_t depth, std::size_t cycle) {
    if (cycle < 1 || cycle > h.cycle_count())
        throw std::out_of_range("history_key_at: cycle outside history");

    std::string key;
    const Percept& now = h.percept(cycle);
    put_u32(key, now.observation);
    if (depth == 0) return key;

    key.reserve(4 + 4 + depth * 13);
    put_u32(key, now.reward_numerator);
    for (std::size_t j = 1; j <= depth; ++j) {
        if (cycle <= j) {
            key.push_back('\0');
            continue;
        }
        const std::size_t c = cycle - j;
        key.push_back('\1');
        put_u32(key, h.percept(c).observation);
        put_u32(key, h.percept(c).reward_numerator);
        put_u32(key, h.action(c).index);
    }
    return key;
}

std::string history_key(const History& h, std::size_t depth) {
    if (h.empty()) return std::string(depth == 0 ? 0 : 1, '\0');
    return history_key_at(h, depth, h.cycle_count());
}

}  // namespace upsilon
