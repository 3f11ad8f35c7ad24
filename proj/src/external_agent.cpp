#include "upsilon/external_agent.hpp"

#include "json.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace upsilon {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

class Child {
public:
    Child(const std::string& command, const SpaceConfig& space, int timeout_ms) {
        static std::once_flag sigpipe;
        std::call_once(sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });

        int to_child[2], from_child[2];
        if (pipe2(to_child, O_CLOEXEC) != 0) throw HandshakeError("pipe: " + std::string(std::strerror(errno)));
        if (pipe2(from_child, O_CLOEXEC) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            throw HandshakeError("pipe: " + std::string(std::strerror(errno)));
        }
        posix_spawn_file_actions_t fa;
        posix_spawn_file_actions_init(&fa);
        posix_spawn_file_actions_adddup2(&fa, to_child[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&fa, from_child[1], STDOUT_FILENO);
        std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
        char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
        const int rc = posix_spawn(&pid_, "/bin/sh", &fa, nullptr, argv, environ);
        posix_spawn_file_actions_destroy(&fa);
        ::close(to_child[0]);
        ::close(from_child[1]);
        in_ = to_child[1];
        out_ = from_child[0];
        if (rc != 0) {
            pid_ = -1;
            throw HandshakeError("cannot start '" + command + "': " + std::strerror(rc));
        }

        try {
            handshake(command, space, timeout_ms);
        } catch (...) {
            broken_ = true;
            shutdown();
            throw;
        }
    }

    Child(const Child&) = delete;
    Child& operator=(const Child&) = delete;

    ~Child() { shutdown(); }

    void handshake(const std::string& command, const SpaceConfig& space, int timeout_ms) {
        const json hello = {{"type", "hello"},
                            {"spaces",
                             {{"actions", space.action_count},
                              {"observations", space.observation_count},
                              {"reward_denominator", space.reward_denominator}}},
                            {"protocol", 1}};
        const int handshake_ms = std::max(5000, 10 * timeout_ms);
        if (!send(hello)) throw HandshakeError("agent '" + command + "' closed its input during the handshake");
        std::optional<std::string> line;
        try {
            line = read_line(Clock::now() + std::chrono::milliseconds(handshake_ms));
        } catch (const AgentFailure&) {
            throw HandshakeError("agent '" + command + "' exited during the handshake");
        }
        if (!line) throw HandshakeError("agent '" + command + "' did not answer the handshake");
        try {
            const auto msg = json::parse(*line);
            if (msg.at("type") != "ready") throw std::runtime_error("expected ready");
            if (msg.contains("concurrency")) concurrency_ = msg.at("concurrency").get<int>();
        } catch (const std::exception&) {
            throw HandshakeError("agent '" + command + "' sent a bad handshake reply: " + *line);
        }
    }

    void shutdown() {
        if (in_ >= 0) {
            if (!broken_) send(json{{"type", "bye"}});
            ::close(in_);
            in_ = -1;
        }
        if (out_ >= 0) ::close(out_);
        out_ = -1;
        if (pid_ > 0) {
            const pid_t pid = pid_;
            pid_ = -1;
            int status = 0;
            for (int i = 0; i < 50; ++i) {
                if (waitpid(pid, &status, WNOHANG) != 0) return;
                std::this_thread::sleep_for(std::chrono::milliseconds(4));
            }
            ::kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
        }
    }

    bool send(const json& msg) {
        std::string line = msg.dump();
        line.push_back('\n');
        std::size_t off = 0;
        while (off < line.size()) {
            const ssize_t n = ::write(in_, line.data() + off, line.size() - off);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                broken_ = true;
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    /// Empty on timeout; throws AgentFailure on end of stream.
    std::optional<std::string> read_line(Clock::time_point deadline) {
        while (true) {
            if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) return std::nullopt;
            pollfd pfd{out_, POLLIN, 0};
            const int rc = ::poll(&pfd, 1, static_cast<int>(left));
            if (rc < 0 && errno == EINTR) continue;
            if (rc == 0) return std::nullopt;
            char chunk[4096];
            const ssize_t n = ::read(out_, chunk, sizeof chunk);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                broken_ = true;
                throw AgentFailure("external agent closed its output");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    bool broken() const { return broken_; }
    void mark_broken() { broken_ = true; }
    std::size_t outstanding = 0;

private:
    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    std::string buffer_;
    bool broken_ = false;
    int concurrency_ = 1;
};

struct Pool {
    ExternalAgentConfig config;
    SpaceConfig space;
    std::shared_ptr<ExternalAgentStats> stats;
    std::mutex mutex;
    std::vector<std::unique_ptr<Child>> idle;

    std::unique_ptr<Child> acquire() {
        {
            std::lock_guard lock(mutex);
            if (!idle.empty()) {
                auto c = std::move(idle.back());
                idle.pop_back();
                return c;
            }
        }
        ++stats->processes;
        return std::make_unique<Child>(config.command, space, config.timeout_ms);
    }

    void release(std::unique_ptr<Child> c) {
        if (!c || c->broken()) return;
        std::lock_guard lock(mutex);
        idle.push_back(std::move(c));
    }
};

class ExternalAgent final : public Agent {
public:
    explicit ExternalAgent(std::shared_ptr<Pool> pool) : pool_(std::move(pool)) {}
    ~ExternalAgent() override { pool_->release(std::move(child_)); }

    std::string name() const override { return pool_->config.name; }

    void begin_episode(std::uint64_t episode) override {
        episode_ = episode;
        if (!child_ || child_->broken()) child_ = pool_->acquire();
        if (!child_->send(json{{"type", "reset"}, {"episode", episode}})) fail("external agent stopped reading");
    }

    void observe(const History& h) override {
        if (!child_) begin_episode(0);
        const Percept& p = h.last_percept();
        const json msg = {{"type", "percept"},
                          {"o", p.observation},
                          {"r_num", p.reward_numerator},
                          {"cycle", h.cycle_count()},
                          {"episode", episode_}};
        if (!child_->send(msg)) fail("external agent stopped reading");
        ++child_->outstanding;
    }

    Action act(const History& h, Rng& rng) override {
        if (!child_ || child_->outstanding == 0) throw ProtocolError("external agent asked to act before a percept");
        const auto deadline = Clock::now() + std::chrono::milliseconds(pool_->config.timeout_ms);
        while (true) {
            std::optional<std::string> line;
            try {
                line = child_->read_line(deadline);
            } catch (const AgentFailure&) {
                ++pool_->stats->failures;
                throw;
            }
            if (!line) {
                ++pool_->stats->timeouts;
                return Action{static_cast<std::uint32_t>(rng.below(h.space().action_count))};
            }
            // Replies to percepts whose deadline already passed are dropped.
            if (--child_->outstanding > 0) continue;
            try {
                const auto msg = json::parse(*line);
                if (msg.at("type") != "action") throw std::runtime_error("not an action");
                const auto a = msg.at("a").get<std::int64_t>();
                if (a < 0 || a >= static_cast<std::int64_t>(h.space().action_count))
                    throw std::runtime_error("action out of range");
                return Action{static_cast<std::uint32_t>(a)};
            } catch (const std::exception&) {
                fail("malformed reply from external agent '" + name() + "': " + *line);
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& why) {
        if (child_) child_->mark_broken();
        ++pool_->stats->failures;
        throw AgentFailure(why);
    }

    std::shared_ptr<Pool> pool_;
    std::unique_ptr<Child> child_;
    std::uint64_t episode_ = 0;
};

}  // namespace

AgentSpec external_agent(const ExternalAgentConfig& config, const SpaceConfig& space,
                         std::shared_ptr<ExternalAgentStats> stats) {
    if (config.timeout_ms < 1) throw std::invalid_argument("timeout must be >= 1 ms");
    auto pool = std::make_shared<Pool>();
    pool->config = config;
    pool->space = space;
    pool->stats = stats ? std::move(stats) : std::make_shared<ExternalAgentStats>();
    pool->release(pool->acquire());
    return {config.name, [pool] { return std::unique_ptr<Agent>(std::make_unique<ExternalAgent>(pool)); }, space};
}

}  // namespace upsilon
