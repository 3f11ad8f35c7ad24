#pragma once

// Agents implemented outside the tool, spoken to over newline-delimited JSON
// on the child's stdin/stdout:
//
//   -> {"type":"hello","spaces":{"actions":A,"observations":O,"reward_denominator":D},"protocol":1}
//   <- {"type":"ready","concurrency":c}
//   -> {"type":"reset","episode":e}
//   -> {"type":"percept","o":o,"r_num":r,"cycle":k,"episode":e}
//   <- {"type":"action","a":a}
//   -> {"type":"bye"}
//
// A late reply becomes a uniform action plus a warning; a malformed reply or
// a dead process fails the rollout (AgentFailure).

#include "upsilon/agents.hpp"
#include "upsilon/run_config.hpp"

#include <atomic>
#include <memory>
#include <stdexcept>

namespace upsilon {

class HandshakeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExternalAgentStats {
    std::atomic<std::uint64_t> timeouts{0};
    std::atomic<std::uint64_t> failures{0};
    std::atomic<std::uint64_t> processes{0};
};

/// Each rollout borrows one child process from a pool; new children are
/// started on demand, so concurrent rollouts never share a process. Throws
/// HandshakeError if the first child cannot complete the handshake.
AgentSpec external_agent(const ExternalAgentConfig& config, const SpaceConfig& space,
                         std::shared_ptr<ExternalAgentStats> stats = nullptr);

}  // namespace upsilon
