#include "upsilon/benchmark.hpp"

#include "upsilon/environments.hpp"
#include "upsilon/program_io.hpp"
#include "upsilon/report.hpp"
#include "upsilon/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <span>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace upsilon {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
}

std::uint32_t to_u32(const std::string& spec, const std::string& text) {
    std::uint32_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ConfigError("environment '" + spec + "': bad number '" + text + "'");
    return v;
}

}  // namespace

EnvironmentSource native_environment(const std::string& spec, const SpaceConfig& space) {
    const auto parts = split_on(spec, ':');
    if (parts.empty()) throw ConfigError("empty environment spec");
    try {
        if (parts[0] == "copy" && parts.size() == 1) {
            auto s = make_copy_env(space);
            s.id = spec;
            return s;
        }
        if (parts[0] == "constant" && parts.size() == 2) {
            std::vector<std::uint32_t> schedule;
            for (const auto& n : split_on(parts[1], ',')) schedule.push_back(to_u32(spec, n));
            auto s = make_constant_env(std::move(schedule), space);
            s.id = spec;
            return s;
        }
        if (parts[0] == "pattern" && (parts.size() == 2 || parts.size() == 3)) {
            auto s = parts.size() == 2 ? make_pattern_env(to_u32(spec, parts[1]), space)
                                       : make_pattern_env(to_u32(spec, parts[1]), space, to_u32(spec, parts[2]));
            s.id = spec;
            return s;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("environment '" + spec + "': " + e.what());
    }
    throw ConfigError("unknown environment '" + spec + "'");
}

Ensemble make_run_ensemble(const RunConfig& cfg) {
    switch (cfg.source) {
        case EnsembleSource::Enumerate:
            try {
                return build_ensemble(cfg.ensemble, cfg.machine, cfg.space);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        case EnsembleSource::Native: {
            std::vector<EnvironmentSource> sources;
            for (const auto& s : cfg.native_environments) sources.push_back(native_environment(s, cfg.space));
            return ensemble_from_sources(std::move(sources));
        }
        case EnsembleSource::File: {
            std::vector<EnvProgram> programs;
            try {
                for (const auto& bits : read_fixture_file(cfg.fixture_file))
                    programs.push_back(decode_program(bits, cfg.machine));
            } catch (const std::exception& e) {
                throw ConfigError("fixtures '" + cfg.fixture_file.string() + "': " + e.what());
            }
            if (programs.empty()) throw ConfigError("fixtures '" + cfg.fixture_file.string() + "' list no program");
            auto e = ensemble_from_programs(programs, cfg.machine, cfg.space, cfg.ensemble.renormalize);
            e.seed = cfg.seed;
            return e;
        }
    }
    throw ConfigError("unknown ensemble source");
}

Roster make_roster(const RunConfig& cfg) {
    Roster roster;
    for (const auto& name : cfg.agents) {
        const auto ext = std::find_if(cfg.external.begin(), cfg.external.end(),
                                      [&](const ExternalAgentConfig& e) { return e.name == name; });
        if (ext != cfg.external.end()) {
            auto stats = std::make_shared<ExternalAgentStats>();
            roster.agents.push_back(external_agent(*ext, cfg.space, stats));
            roster.external[name] = std::move(stats);
        } else {
            try {
                roster.agents.push_back(builtin_agent(name, cfg.space));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    return roster;
}

namespace {

void check_ensemble(const RunConfig& cfg, const Ensemble& ensemble) {
    for (const auto& m : ensemble.members) {
        if (!(m.source.space == cfg.space))
            throw ConfigError("environment '" + m.source.id + "' does not use the configured spaces");
        if (cfg.valuation.mode == ValueMode::Summable && !m.source.summable)
            throw ConfigError("environment '" + m.source.id + "' is not reward-summable; use a discounted or " +
                              "harmonic valuation.mode");
    }
}

}  // namespace

int run_benchmark(const std::filesystem::path& config_path, std::optional<std::size_t> workers, std::ostream& err) {
    RunConfig cfg;
    Ensemble ensemble;
    try {
        cfg = load_run_config(config_path);
        if (workers) cfg.workers = *workers;
        ensemble = make_run_ensemble(cfg);
        check_ensemble(cfg, ensemble);
    } catch (const ConfigError& e) {
        err << "upsilon: invalid config: " << e.what() << '\n';
        return 2;
    }
    try {
        auto roster = make_roster(cfg);
        const auto comparison = compare_agents(roster.agents, ensemble, cfg.valuation, {cfg.workers});
        RunSummary summary;
        for (const auto& [name, stats] : roster.external) {
            summary.timeout_warnings[name] = stats->timeouts.load();
            if (stats->timeouts > 0)
                err << "upsilon: warning: agent '" << name << "' timed out " << stats->timeouts.load()
                    << " time(s); uniform actions were substituted\n";
            if (stats->failures > 0)
                err << "upsilon: warning: agent '" << name << "' failed " << stats->failures.load()
                    << " rollout(s); they are excluded from the estimate\n";
        }
        write_text_file(cfg.output_dir / "report.json", report_json(cfg, ensemble, comparison, summary).dump(2) + "\n");
        write_text_file(cfg.output_dir / "rows.csv", rows_csv(ensemble, comparison));
        write_text_file(cfg.output_dir / "manifest.json", manifest_json(cfg).dump(2) + "\n");
    } catch (const ConfigError& e) {
        err << "upsilon: invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "upsilon: run failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int run_sensitivity(const std::filesystem::path& config_path, std::size_t permutations,
                    std::optional<std::size_t> workers, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
        if (workers) cfg.workers = *workers;
        if (cfg.source != EnsembleSource::Enumerate)
            throw ConfigError("sensitivity needs 'ensemble.source = enumerate'");
        if (!cfg.external.empty()) throw ConfigError("sensitivity runs built-in agents only");
        if (permutations < 2) throw ConfigError("sensitivity needs at least 2 machines");
    } catch (const ConfigError& e) {
        err << "upsilon: invalid config: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto roster = make_roster(cfg);
        const auto machines = permuted_machines(cfg.machine, permutations, cfg.seed);
        const auto report =
            machine_sensitivity(roster.agents, cfg.ensemble, machines, cfg.space, cfg.valuation, {cfg.workers});

        json rows = json::array();
        out << std::left << std::setw(8) << "machine" << std::setw(12) << "opcodes";
        for (const auto& a : roster.agents) out << std::setw(26) << a.name;
        out << "ordering_preserved\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            std::string table;
            json names = json::array();
            for (auto ins : row.machine.opcode_table) {
                table.push_back(instruction_symbol(ins));
                names.push_back(std::string(instruction_name(ins)));
            }
            json results = json::array();
            out << std::setw(8) << i << std::setw(12) << table;
            for (const auto& r : row.results) {
                results.push_back({{"agent", r.agent}, {"upsilon", r.upsilon}, {"ci_half_width", r.ci_half_width}});
                out << std::setw(26) << format_number(r.upsilon);
            }
            out << (row.ordering_preserved ? "yes" : "no") << '\n';
            rows.push_back({{"machine", i},
                            {"opcodes", std::move(names)},
                            {"results", std::move(results)},
                            {"ordering", row.ordering},
                            {"ordering_preserved", row.ordering_preserved}});
        }
        const json doc = {{"tool", {{"name", "upsilon"}, {"version", UPSILON_VERSION}}},
                          {"seed", cfg.seed},
                          {"permutations", permutations},
                          {"max_length_bits", cfg.ensemble.max_program_length_bits},
                          {"machines", std::move(rows)}};
        write_text_file(cfg.output_dir / "sensitivity.json", doc.dump(2) + "\n");
    } catch (const ConfigError& e) {
        err << "upsilon: invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "upsilon: sensitivity failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

ExampleStudy run_example_study(const std::filesystem::path& out, std::uint64_t seed, const StudyOptions& opts) {
    if (opts.cycles < 5002) throw std::invalid_argument("the study needs at least 5002 cycles");
    const auto env = make_copy_env(SpaceConfig{});
    const std::vector<std::string> names = {"opt", "uniform", "piecewise"};

    ExampleStudy study;
    for (const auto& name : names) {
        const auto agent = builtin_agent(name, env.space);
        // The always-1 agent is deterministic; one episode is exact.
        const std::size_t episodes = name == "opt" ? 1 : opts.episodes;
        study.profile[name] = per_cycle_reward_profile(agent, env, opts.cycles, episodes, seed);
        const auto& p = study.profile[name];
        auto phase = [&](std::size_t from, std::size_t to) {
            return mean_of(std::span<const double>(p.data() + from - 1, to - from + 1));
        };
        study.phases.push_back({name, phase(2, 101), phase(102, 5001), phase(5002, opts.cycles)});
    }

    for (double gamma : opts.gammas) {
        for (const auto& name : names) {
            ValuationParams params;
            params.mode = ValueMode::Discounted;
            params.gamma = gamma;
            params.horizon = 100000;
            params.trunc_epsilon = opts.truncation_epsilon;
            params.episodes = name == "opt" ? 1 : opts.discount_episodes;
            params.seed = seed;
            const auto v = discounted_value(builtin_agent(name, env.space), env, params);
            study.discounted.push_back({gamma, name, v.mean, v.ci_half_width});
        }
    }

    std::ostringstream profile;
    profile << "cycle";
    for (const auto& n : names) profile << ',' << n;
    profile << '\n';
    for (std::size_t k = 1; k <= opts.cycles; ++k) {
        profile << k;
        for (const auto& n : names) profile << ',' << format_number(study.profile[n][k - 1]);
        profile << '\n';
    }
    write_text_file(out / "profile.csv", profile.str());

    std::ostringstream disc;
    disc << "gamma,agent,value,ci_half_width\n";
    json disc_rows = json::array();
    for (const auto& d : study.discounted) {
        disc << format_number(d.gamma) << ',' << d.agent << ',' << format_number(d.value) << ','
             << format_number(d.ci_half_width) << '\n';
        disc_rows.push_back({{"gamma", d.gamma}, {"agent", d.agent}, {"value", d.value}, {"ci_half_width", d.ci_half_width}});
    }
    write_text_file(out / "discounted.csv", disc.str());

    const auto find = [&](const std::string& n) {
        return *std::find_if(study.phases.begin(), study.phases.end(), [&](const PhaseMeans& p) { return p.agent == n; });
    };
    const auto u = find("uniform"), pw = find("piecewise");
    auto better = [](double a, double b, const std::string& an, const std::string& bn) {
        if (std::abs(a - b) < 0.02) return an + " and " + bn + " are about equal";
        return (a > b ? an : bn) + " is ahead";
    };
    json phases = json::array();
    for (const auto& p : study.phases)
        phases.push_back({{"agent", p.agent},
                          {"cycles_2_101", p.short_term},
                          {"cycles_102_5001", p.medium_term},
                          {"cycles_5002_end", p.long_term}});
    const json doc = {
        {"tool", {{"name", "upsilon"}, {"version", UPSILON_VERSION}}},
        {"seed", seed},
        {"environment", "copy"},
        {"cycles", opts.cycles},
        {"episodes", opts.episodes},
        {"phases", std::move(phases)},
        {"ordering",
         {{"short_term", better(u.short_term, pw.short_term, "uniform", "piecewise")},
          {"medium_term", better(u.medium_term, pw.medium_term, "uniform", "piecewise")},
          {"long_term", better(u.long_term, pw.long_term, "uniform", "piecewise")}}},
        {"discounted", std::move(disc_rows)}};
    write_text_file(out / "study.json", doc.dump(2) + "\n");
    return study;
}

}  // namespace upsilon
