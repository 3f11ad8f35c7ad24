#pragma once

#include "upsilon/external_agent.hpp"
#include "upsilon/measure.hpp"
#include "upsilon/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace upsilon {

/// Native environment from a spec string: `constant:<n>[,<n>...]`,
/// `pattern:<period>[:<window>]` or `copy`. Throws ConfigError.
EnvironmentSource native_environment(const std::string& spec, const SpaceConfig& space);

Ensemble make_run_ensemble(const RunConfig& cfg);

struct Roster {
    std::vector<AgentSpec> agents;
    std::map<std::string, std::shared_ptr<ExternalAgentStats>> external;
};

Roster make_roster(const RunConfig& cfg);

/// Exit codes: 0 success, 1 runtime failure, 2 invalid config. Diagnostics go to `err`.
int run_benchmark(const std::filesystem::path& config_path, std::optional<std::size_t> workers, std::ostream& err);

int run_sensitivity(const std::filesystem::path& config_path, std::size_t permutations,
                    std::optional<std::size_t> workers, std::ostream& out, std::ostream& err);

struct StudyOptions {
    std::size_t cycles = 6000;
    std::size_t episodes = 10000;
    std::vector<double> gammas = {0.5, 0.9, 0.99, 0.999, 0.9999};
    std::size_t discount_episodes = 200;
    double truncation_epsilon = 1e-9;
};

struct PhaseMeans {
    std::string agent;
    double short_term = 0.0;   // cycles 2..101
    double medium_term = 0.0;  // cycles 102..5001
    double long_term = 0.0;    // cycles 5002..end
};

struct ExampleStudy {
    /// profile[agent][k - 1] = mean reward at cycle k.
    std::map<std::string, std::vector<double>> profile;
    std::vector<PhaseMeans> phases;
    struct Discounted {
        double gamma;
        std::string agent;
        double value;
        double ci_half_width;
    };
    std::vector<Discounted> discounted;
};

/// The copy-environment study of the always-1, uniform and piecewise agents:
/// writes profile.csv, discounted.csv and study.json into `out`.
ExampleStudy run_example_study(const std::filesystem::path& out, std::uint64_t seed, const StudyOptions& opts = {});

}  // namespace upsilon
