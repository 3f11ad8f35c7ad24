#pragma once

// The aggregate measure: a simplicity-weighted ensemble of environments, the
// weighted sum of per-environment values for each agent, paired agent
// comparisons, and the reference-machine sensitivity experiment.

#include "upsilon/agents.hpp"
#include "upsilon/environment.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/stats.hpp"
#include "upsilon/valuation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace upsilon {

enum class WeightScheme { Length, Kt };

std::string_view weight_scheme_name(WeightScheme scheme);

struct EnsembleSpec {
    std::size_t max_program_length_bits = 24;
    /// Behavior-signature horizon for merging equivalent programs; empty = no dedup.
    std::optional<std::size_t> dedup_horizon = 8;
    WeightScheme weight_scheme = WeightScheme::Length;
    bool renormalize = true;
    /// Draw this many environments from the prior instead of enumerating.
    std::optional<std::size_t> sample_size;
    std::uint64_t seed = 0;
    /// Cycles of the all-zero-action run that measure running time for Kt.
    std::size_t kt_cycles = 8;

    void validate() const;
};

struct EnsembleMember {
    /// Shortlex index of the representative program in the full enumeration
    /// (or the position in a hand-built ensemble).
    std::uint64_t program_id = 0;
    std::optional<EnvProgram> program;
    double raw_weight = 0.0;
    double weight = 0.0;
    /// Programs merged into this member by dedup (or sample draws).
    std::size_t multiplicity = 1;
    EnvironmentSource source;
};

struct Ensemble {
    std::vector<EnsembleMember> members;
    SpaceConfig space;
    std::size_t max_length_bits = 0;
    std::size_t enumerated_count = 0;
    /// Sum of 2^-|p| (or the Kt weights) over every enumerated program.
    double kraft_sum = 0.0;
    std::string dedup_mode = "none";
    std::string weight_scheme = "length";
    bool sampled = false;
    std::uint64_t seed = 0;

    double weight_total() const;
};

/// Throws std::invalid_argument when no valid program fits in the length bound.
Ensemble build_ensemble(const EnsembleSpec& spec, const MachineConfig& machine, const SpaceConfig& space);

/// Ensemble over explicit programs (e.g. a fixture file) with 2^-|p| weights;
/// program ids are list positions.
Ensemble ensemble_from_programs(const std::vector<EnvProgram>& programs, const MachineConfig& machine,
                                const SpaceConfig& space, bool renormalize = true);

/// Hand-built ensemble; weights are normalized to sum to one.
Ensemble ensemble_from_sources(std::vector<EnvironmentSource> sources, std::vector<double> weights = {});

struct ExecutionOptions {
    std::size_t workers = 0;  // 0 = hardware concurrency
};

struct AgentResult {
    std::string agent;
    double upsilon = 0.0;
    double ci_half_width = 0.0;
    /// One estimate per ensemble member, in member order.
    std::vector<ValueEstimate> values;
    std::size_t failed_episodes = 0;
    /// Members left out because every rollout failed.
    std::size_t excluded_environments = 0;
};

/// Valuation params for one member: the environment stream is the program id.
ValuationParams member_params(const ValuationParams& base, const EnsembleMember& member);

AgentResult estimate_upsilon(const AgentSpec& agent, const Ensemble& ensemble, const ValuationParams& params,
                             const ExecutionOptions& exec = {});

/// Single-pass estimate of the mixture value: each episode draws an
/// environment from the ensemble weights, then rolls it out once.
MeanInterval mixture_upsilon(const AgentSpec& agent, const Ensemble& ensemble, const ValuationParams& params,
                             std::size_t draws);

struct PairComparison {
    std::string first;
    std::string second;
    /// Weighted mean of paired per-environment differences (first - second).
    double difference = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// The bootstrap interval excludes zero.
    bool significant = false;
};

/// Paired bootstrap over episodes within each environment (enumerated
/// ensembles) or over environments (sampled ensembles).
PairComparison compare_pair(const AgentResult& first, const AgentResult& second, const Ensemble& ensemble,
                            double confidence, std::uint64_t seed, std::size_t replicates = 2000);

struct ComparisonReport {
    std::vector<AgentResult> results;
    std::vector<PairComparison> pairs;  // every (i, j), i < j, roster order
    /// Agent names by decreasing upsilon (stable on ties).
    std::vector<std::string> ordering;
};

ComparisonReport compare_agents(const std::vector<AgentSpec>& agents, const Ensemble& ensemble,
                                const ValuationParams& params, const ExecutionOptions& exec = {});

/// Identity first, then count - 1 seeded shuffles of the opcode table.
std::vector<MachineConfig> permuted_machines(const MachineConfig& base, std::size_t count, std::uint64_t seed);

struct SensitivityRow {
    MachineConfig machine;
    std::vector<AgentResult> results;
    std::vector<std::string> ordering;
    /// Ordering equals the first machine's ordering.
    bool ordering_preserved = true;
};

struct SensitivityReport {
    std::vector<SensitivityRow> rows;
};

SensitivityReport machine_sensitivity(const std::vector<AgentSpec>& agents, const EnsembleSpec& spec,
                                      const std::vector<MachineConfig>& machines, const SpaceConfig& space,
                                      const ValuationParams& params, const ExecutionOptions& exec = {});

}  // namespace upsilon
