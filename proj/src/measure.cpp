#include "upsilon/measure.hpp"

#include "upsilon/parallel.hpp"
#include "upsilon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace upsilon {

std::string_view weight_scheme_name(WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::Length: return "length";
        case WeightScheme::Kt: return "kt";
    }
    return "?";
}

void EnsembleSpec::validate() const {
    if (max_program_length_bits < 1) throw std::invalid_argument("max program length must be >= 1 bit");
    if (max_program_length_bits > 40) throw std::invalid_argument("max program length is capped at 40 bits");
    if (dedup_horizon && *dedup_horizon < 1) throw std::invalid_argument("dedup horizon must be >= 1");
    if (sample_size && *sample_size < 1) throw std::invalid_argument("sample size must be >= 1");
    if (kt_cycles < 1) throw std::invalid_argument("kt cycles must be >= 1");
}

double Ensemble::weight_total() const {
    CompensatedSum s;
    for (const auto& m : members) s.add(m.weight);
    return s.value();
}

Ensemble build_ensemble(const EnsembleSpec& spec, const MachineConfig& machine, const SpaceConfig& space) {
    spec.validate();
    machine.validate();
    space.validate();
    const auto programs = enumerate_programs(spec.max_program_length_bits, machine);
    if (programs.empty())
        throw std::invalid_argument("no valid program fits in " + std::to_string(spec.max_program_length_bits) +
                                    " bits");

    Ensemble out;
    out.space = space;
    out.max_length_bits = spec.max_program_length_bits;
    out.enumerated_count = programs.size();
    out.weight_scheme = std::string(weight_scheme_name(spec.weight_scheme));
    out.dedup_mode = spec.dedup_horizon ? "signature:" + std::to_string(*spec.dedup_horizon) : "none";
    out.seed = spec.seed;

    std::vector<double> raw(programs.size());
    for (std::size_t i = 0; i < programs.size(); ++i) {
        const double w = prior_weight(programs[i]).value();
        raw[i] = spec.weight_scheme == WeightScheme::Length
                     ? w
                     : std::exp2(-kt_cost(programs[i], execution_steps(programs[i], spec.kt_cycles, space, machine)));
    }
    out.kraft_sum = compensated_sum(raw);

    // (program index, summed raw weight, multiplicity)
    struct Class {
        std::size_t rep;
        CompensatedSum weight;
        std::size_t count = 0;
    };
    std::vector<Class> classes;
    if (spec.dedup_horizon) {
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < programs.size(); ++i) {
            auto sig = behavior_signature(programs[i], *spec.dedup_horizon, space, machine);
            auto [it, fresh] = seen.try_emplace(std::move(sig), classes.size());
            if (fresh) classes.push_back({i, {}, 0});
            classes[it->second].weight.add(raw[i]);
            ++classes[it->second].count;
        }
    } else {
        classes.reserve(programs.size());
        for (std::size_t i = 0; i < programs.size(); ++i) {
            classes.push_back({i, {}, 1});
            classes.back().weight.add(raw[i]);
        }
    }

    auto member_of = [&](const Class& c) {
        EnsembleMember m;
        m.program_id = c.rep;
        m.program = programs[c.rep];
        m.raw_weight = c.weight.value();
        m.multiplicity = c.count;
        m.source = program_source("p" + std::to_string(c.rep), programs[c.rep], machine, space);
        return m;
    };

    if (spec.sample_size) {
        out.sampled = true;
        std::vector<double> cumulative(classes.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < classes.size(); ++i) cumulative[i] = acc += classes[i].weight.value();
        std::vector<std::size_t> draws(classes.size(), 0);
        Rng rng(derive_seed(spec.seed, {stream::sampling}));
        for (std::size_t d = 0; d < *spec.sample_size; ++d) {
            const double u = rng.unit() * acc;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            const std::size_t idx =
                std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), classes.size() - 1);
            ++draws[idx];
        }
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (draws[i] == 0) continue;
            auto m = member_of(classes[i]);
            m.multiplicity = draws[i];
            m.weight = static_cast<double>(draws[i]) / static_cast<double>(*spec.sample_size);
            out.members.push_back(std::move(m));
        }
        return out;
    }

    CompensatedSum total;
    for (const auto& c : classes) total.add(c.weight.value());
    for (const auto& c : classes) {
        auto m = member_of(c);
        m.weight = spec.renormalize ? m.raw_weight / total.value() : m.raw_weight;
        out.members.push_back(std::move(m));
    }
    return out;
}

Ensemble ensemble_from_programs(const std::vector<EnvProgram>& programs, const MachineConfig& machine,
                                const SpaceConfig& space, bool renormalize) {
    if (programs.empty()) throw std::invalid_argument("ensemble needs at least one program");
    Ensemble out;
    out.space = space;
    out.enumerated_count = programs.size();
    CompensatedSum total;
    for (std::size_t i = 0; i < programs.size(); ++i) {
        EnsembleMember m;
        m.program_id = i;
        m.program = programs[i];
        m.raw_weight = prior_weight(programs[i]).value();
        m.source = program_source("p" + std::to_string(i), programs[i], machine, space);
        total.add(m.raw_weight);
        out.max_length_bits = std::max(out.max_length_bits, programs[i].length_bits());
        out.members.push_back(std::move(m));
    }
    out.kraft_sum = total.value();
    for (auto& m : out.members) m.weight = renormalize ? m.raw_weight / total.value() : m.raw_weight;
    return out;
}

Ensemble ensemble_from_sources(std::vector<EnvironmentSource> sources, std::vector<double> weights) {
    if (sources.empty()) throw std::invalid_argument("ensemble needs at least one environment");
    if (weights.empty()) weights.assign(sources.size(), 1.0);
    if (weights.size() != sources.size()) throw std::invalid_argument("one weight per environment required");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("ensemble weights must be positive");
    const double total = compensated_sum(weights);
    Ensemble out;
    out.space = sources.front().space;
    out.enumerated_count = sources.size();
    out.kraft_sum = total;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        EnsembleMember m;
        m.program_id = i;
        m.raw_weight = weights[i];
        m.weight = weights[i] / total;
        m.source = std::move(sources[i]);
        out.members.push_back(std::move(m));
    }
    return out;
}

ValuationParams member_params(const ValuationParams& base, const EnsembleMember& member) {
    ValuationParams p = base;
    p.environment_stream = member.program_id;
    return p;
}

namespace {

// Rescales so that dropping excluded members keeps the ensemble's total mass.
double inclusion_scale(const std::vector<ValueEstimate>& values, const Ensemble& ensemble) {
    CompensatedSum included;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].episodes_used > 0) included.add(ensemble.members[i].weight);
    if (included.value() <= 0.0) return 0.0;
    return ensemble.weight_total() / included.value();
}

}  // namespace

AgentResult estimate_upsilon(const AgentSpec& agent, const Ensemble& ensemble, const ValuationParams& params,
                             const ExecutionOptions& exec) {
    params.validate();
    AgentResult out;
    out.agent = agent.name;
    out.values.resize(ensemble.members.size());
    parallel_for(ensemble.members.size(), exec.workers, [&](std::size_t i) {
        const auto& m = ensemble.members[i];
        out.values[i] = estimate_value(agent, m.source, member_params(params, m));
    });

    const double scale = inclusion_scale(out.values, ensemble);
    CompensatedSum total, var;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const auto& v = out.values[i];
        out.failed_episodes += v.failed_episodes;
        if (v.episodes_used == 0) {
            ++out.excluded_environments;
            continue;
        }
        const double w = ensemble.members[i].weight * scale;
        total.add(w * v.mean);
        var.add(w * w * v.ci_half_width * v.ci_half_width);
    }
    out.upsilon = total.value();
    out.ci_half_width = std::sqrt(var.value());
    return out;
}

MeanInterval mixture_upsilon(const AgentSpec& agent, const Ensemble& ensemble, const ValuationParams& params,
                             std::size_t draws) {
    params.validate();
    if (draws < 1) throw std::invalid_argument("mixture estimate needs at least one draw");
    std::vector<double> cumulative(ensemble.members.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cumulative.size(); ++i) cumulative[i] = acc += ensemble.members[i].weight;
    const double mass = ensemble.weight_total();

    ValuationParams mp = params;
    mp.seed = derive_seed(params.seed, {stream::mixture});
    std::vector<double> values;
    values.reserve(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        Rng rng(derive_seed(params.seed, {stream::mixture, d}));
        const double u = rng.unit() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t idx =
            std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        const auto& m = ensemble.members[idx];
        try {
            values.push_back(mass * episode_value(agent, m.source, member_params(mp, m), d));
        } catch (const AgentFailure&) {
        }
    }
    return mean_interval(values, params.confidence, derive_seed(params.seed, {stream::mixture, stream::bootstrap}));
}

PairComparison compare_pair(const AgentResult& first, const AgentResult& second, const Ensemble& ensemble,
                            double confidence, std::uint64_t seed, std::size_t replicates) {
    if (first.values.size() != ensemble.members.size() || second.values.size() != ensemble.members.size())
        throw std::invalid_argument("results do not match the ensemble");
    if (replicates < 1) throw std::invalid_argument("bootstrap needs at least one replicate");

    struct Paired {
        std::size_t member;
        double weight;
        std::vector<double> diffs;
        double mean;
    };
    std::vector<Paired> envs;
    CompensatedSum included;
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        const auto& a = first.values[i];
        const auto& b = second.values[i];
        Paired p{i, ensemble.members[i].weight, {}, 0.0};
        std::size_t x = 0, y = 0;
        while (x < a.episode_ids.size() && y < b.episode_ids.size()) {
            if (a.episode_ids[x] < b.episode_ids[y]) {
                ++x;
            } else if (b.episode_ids[y] < a.episode_ids[x]) {
                ++y;
            } else {
                p.diffs.push_back(a.episode_values[x++] - b.episode_values[y++]);
            }
        }
        if (p.diffs.empty()) continue;
        p.mean = mean_of(p.diffs);
        included.add(p.weight);
        envs.push_back(std::move(p));
    }

    PairComparison out;
    out.first = first.agent;
    out.second = second.agent;
    if (envs.empty()) return out;
    const double scale = ensemble.weight_total() / included.value();
    CompensatedSum diff;
    for (const auto& e : envs) diff.add(e.weight * scale * e.mean);
    out.difference = diff.value();

    Rng rng(seed);
    std::vector<double> stats;
    stats.reserve(replicates);
    if (!ensemble.sampled) {
        for (std::size_t r = 0; r < replicates; ++r) {
            CompensatedSum s;
            for (const auto& e : envs) {
                double m = e.mean;
                const bool constant =
                    std::all_of(e.diffs.begin(), e.diffs.end(), [&](double d) { return d == e.diffs.front(); });
                if (!constant) {
                    CompensatedSum t;
                    for (std::size_t k = 0; k < e.diffs.size(); ++k) t.add(e.diffs[rng.below(e.diffs.size())]);
                    m = t.value() / static_cast<double>(e.diffs.size());
                }
                s.add(e.weight * scale * m);
            }
            stats.push_back(s.value());
        }
    } else {
        // One entry per sample draw; resample draws.
        std::vector<double> draws;
        for (const auto& e : envs)
            draws.insert(draws.end(), ensemble.members[e.member].multiplicity, e.mean);
        const double mass = ensemble.weight_total();
        for (std::size_t r = 0; r < replicates; ++r) {
            CompensatedSum t;
            for (std::size_t k = 0; k < draws.size(); ++k) t.add(draws[rng.below(draws.size())]);
            stats.push_back(mass * t.value() / static_cast<double>(draws.size()));
        }
    }
    std::tie(out.ci_low, out.ci_high) = percentile_interval(stats, confidence);
    out.significant = out.ci_low > 0.0 || out.ci_high < 0.0;
    return out;
}

namespace {

std::vector<std::string> ordering_of(const std::vector<AgentResult>& results) {
    std::vector<std::size_t> idx(results.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].upsilon > results[b].upsilon; });
    std::vector<std::string> names;
    for (auto i : idx) names.push_back(results[i].agent);
    return names;
}

}  // namespace

ComparisonReport compare_agents(const std::vector<AgentSpec>& agents, const Ensemble& ensemble,
                                const ValuationParams& params, const ExecutionOptions& exec) {
    if (agents.empty()) throw std::invalid_argument("no agents to compare");
    ComparisonReport out;
    for (const auto& a : agents) out.results.push_back(estimate_upsilon(a, ensemble, params, exec));
    for (std::size_t i = 0; i < agents.size(); ++i)
        for (std::size_t j = i + 1; j < agents.size(); ++j)
            out.pairs.push_back(compare_pair(out.results[i], out.results[j], ensemble, params.confidence,
                                             derive_seed(params.seed, {stream::bootstrap, 1000 + i, j})));
    out.ordering = ordering_of(out.results);
    return out;
}

std::vector<MachineConfig> permuted_machines(const MachineConfig& base, std::size_t count, std::uint64_t seed) {
    std::vector<MachineConfig> out;
    if (count == 0) return out;
    out.push_back(base);
    for (std::size_t i = 1; i < count; ++i) {
        MachineConfig m = base;
        Rng rng(derive_seed(seed, {stream::permutation, i}));
        auto& t = m.opcode_table;
        for (std::size_t k = t.size(); k > 1; --k) std::swap(t[k - 1], t[rng.below(k)]);
        out.push_back(std::move(m));
    }
    return out;
}

SensitivityReport machine_sensitivity(const std::vector<AgentSpec>& agents, const EnsembleSpec& spec,
                                      const std::vector<MachineConfig>& machines, const SpaceConfig& space,
                                      const ValuationParams& params, const ExecutionOptions& exec) {
    SensitivityReport out;
    for (const auto& machine : machines) {
        const auto ensemble = build_ensemble(spec, machine, space);
        SensitivityRow row;
        row.machine = machine;
        for (const auto& a : agents) row.results.push_back(estimate_upsilon(a, ensemble, params, exec));
        row.ordering = ordering_of(row.results);
        row.ordering_preserved = out.rows.empty() || row.ordering == out.rows.front().ordering;
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace upsilon
