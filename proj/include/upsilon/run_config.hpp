#pragma once

// Flat key = value run configuration. One setting per line, '#' starts a
// comment, unknown keys and repeated keys are errors, `seed` is mandatory.
//
//   seed = 7
//   output_dir = out
//   workers = 4
//   spaces.actions = 2
//   spaces.observations = 2
//   spaces.reward_denominator = 255
//   machine.step_budget = 4096
//   machine.tape_length = 64
//   machine.cell_modulus = 256
//   machine.opcodes = MOVE_RIGHT,MOVE_LEFT,INC,DEC,OPEN_BRACKET,CLOSE_BRACKET,READ_ACTION,RANDOM_BIT,YIELD
//   ensemble.source = enumerate            # enumerate | native | file
//   ensemble.max_length_bits = 24
//   ensemble.dedup_horizon = 8             # 0 disables dedup
//   ensemble.weight_scheme = length        # length | kt
//   ensemble.kt_cycles = 8
//   ensemble.renormalize = true
//   ensemble.sample_size = 500             # optional
//   ensemble.environments = constant:255; pattern:2; copy
//   ensemble.fixtures = programs.txt
//   valuation.mode = summable              # summable | discounted | harmonic
//   valuation.gamma = 0.9
//   valuation.horizon = 1000
//   valuation.episodes = 100
//   valuation.epsilon = 0.001
//   valuation.confidence = 0.95
//   agents = rand, basic, 2back, ext
//   agent.ext.command = ./my_agent --flag
//   agent.ext.timeout_ms = 1000

#include "upsilon/interaction.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/measure.hpp"
#include "upsilon/valuation.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace upsilon {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EnsembleSource { Enumerate, Native, File };

struct ExternalAgentConfig {
    std::string name;
    std::string command;
    int timeout_ms = 1000;
};

struct RunConfig {
    SpaceConfig space;
    MachineConfig machine;
    EnsembleSpec ensemble;
    EnsembleSource source = EnsembleSource::Enumerate;
    std::vector<std::string> native_environments;
    std::filesystem::path fixture_file;
    ValuationParams valuation;
    std::vector<std::string> agents = {"rand", "basic", "2back"};
    std::vector<ExternalAgentConfig> external;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "upsilon-out";
    std::size_t workers = 0;
    /// Settings as written, in file order.
    std::vector<std::pair<std::string, std::string>> entries;
};

/// Relative file paths resolve against `base_dir`. Throws ConfigError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace upsilon
