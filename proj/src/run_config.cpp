#include "upsilon/run_config.hpp"

#include "upsilon/agents.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace upsilon {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("'" + key + "': not a valid number: '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + value + "'");
}

template <class T>
T parse_positive(const std::string& key, const std::string& value) {
    const T v = parse_number<T>(key, value);
    if (v < 1) throw ConfigError("'" + key + "' must be >= 1");
    return v;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::map<std::string, std::string> external_cmd, external_timeout;
    std::set<std::string> seen;
    bool have_seed = false;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second) throw ConfigError("'" + key + "' is set more than once");
        cfg.entries.emplace_back(key, value);

        if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value);
            have_seed = true;
        } else if (key == "output_dir") {
            if (value.empty()) throw ConfigError("'output_dir' is empty");
            cfg.output_dir = value;
        } else if (key == "workers") {
            cfg.workers = parse_number<std::size_t>(key, value);
        } else if (key == "spaces.actions") {
            cfg.space.action_count = parse_positive<std::uint32_t>(key, value);
        } else if (key == "spaces.observations") {
            cfg.space.observation_count = parse_positive<std::uint32_t>(key, value);
        } else if (key == "spaces.reward_denominator") {
            cfg.space.reward_denominator = parse_positive<std::uint32_t>(key, value);
        } else if (key == "machine.step_budget") {
            cfg.machine.step_budget_per_cycle = parse_positive<std::uint32_t>(key, value);
        } else if (key == "machine.tape_length") {
            cfg.machine.tape_length = parse_number<std::uint32_t>(key, value);
        } else if (key == "machine.cell_modulus") {
            cfg.machine.cell_modulus = parse_number<std::uint32_t>(key, value);
        } else if (key == "machine.opcodes") {
            const auto names = split(value, ',');
            if (names.size() != cfg.machine.opcode_table.size())
                throw ConfigError("'machine.opcodes' needs " + std::to_string(cfg.machine.opcode_table.size()) +
                                  " instruction names");
            for (std::size_t i = 0; i < names.size(); ++i) {
                auto ins = parse_instruction(names[i]);
                if (!ins) throw ConfigError("'machine.opcodes': unknown instruction '" + names[i] + "'");
                cfg.machine.opcode_table[i] = *ins;
            }
        } else if (key == "ensemble.source") {
            if (value == "enumerate") cfg.source = EnsembleSource::Enumerate;
            else if (value == "native") cfg.source = EnsembleSource::Native;
            else if (value == "file") cfg.source = EnsembleSource::File;
            else throw ConfigError("'ensemble.source' must be enumerate, native or file");
        } else if (key == "ensemble.max_length_bits") {
            cfg.ensemble.max_program_length_bits = parse_positive<std::size_t>(key, value);
        } else if (key == "ensemble.dedup_horizon") {
            const auto h = parse_number<std::size_t>(key, value);
            cfg.ensemble.dedup_horizon = h == 0 ? std::nullopt : std::optional<std::size_t>(h);
        } else if (key == "ensemble.weight_scheme") {
            if (value == "length") cfg.ensemble.weight_scheme = WeightScheme::Length;
            else if (value == "kt") cfg.ensemble.weight_scheme = WeightScheme::Kt;
            else throw ConfigError("'ensemble.weight_scheme' must be length or kt");
        } else if (key == "ensemble.kt_cycles") {
            cfg.ensemble.kt_cycles = parse_positive<std::size_t>(key, value);
        } else if (key == "ensemble.renormalize") {
            cfg.ensemble.renormalize = parse_bool(key, value);
        } else if (key == "ensemble.sample_size") {
            cfg.ensemble.sample_size = parse_positive<std::size_t>(key, value);
        } else if (key == "ensemble.environments") {
            cfg.native_environments = split(value, ';');
        } else if (key == "ensemble.fixtures") {
            const std::filesystem::path p = value;
            cfg.fixture_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        } else if (key == "valuation.mode") {
            if (value == "summable") cfg.valuation.mode = ValueMode::Summable;
            else if (value == "discounted") cfg.valuation.mode = ValueMode::Discounted;
            else if (value == "harmonic") cfg.valuation.mode = ValueMode::Harmonic;
            else throw ConfigError("'valuation.mode' must be summable, discounted or harmonic");
        } else if (key == "valuation.gamma") {
            cfg.valuation.gamma = parse_number<double>(key, value);
        } else if (key == "valuation.horizon") {
            cfg.valuation.horizon = parse_positive<std::size_t>(key, value);
        } else if (key == "valuation.episodes") {
            cfg.valuation.episodes = parse_positive<std::size_t>(key, value);
        } else if (key == "valuation.epsilon") {
            cfg.valuation.trunc_epsilon = parse_number<double>(key, value);
        } else if (key == "valuation.confidence") {
            cfg.valuation.confidence = parse_number<double>(key, value);
        } else if (key == "agents") {
            cfg.agents = split(value, ',');
        } else if (key.starts_with("agent.") && key.ends_with(".command")) {
            const auto name = key.substr(6, key.size() - 6 - 8);
            if (name.empty()) throw ConfigError("'" + key + "': empty agent name");
            if (value.empty()) throw ConfigError("'" + key + "': empty command");
            external_cmd[name] = value;
        } else if (key.starts_with("agent.") && key.ends_with(".timeout_ms")) {
            const auto name = key.substr(6, key.size() - 6 - 11);
            if (name.empty()) throw ConfigError("'" + key + "': empty agent name");
            external_timeout[name] = value;
        } else {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }

    if (!have_seed) throw ConfigError("'seed' is required");
    cfg.valuation.seed = cfg.seed;
    cfg.ensemble.seed = cfg.seed;

    try {
        cfg.space.validate();
        cfg.machine.validate();
        cfg.ensemble.validate();
        cfg.valuation.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    for (const auto& [name, t] : external_timeout) {
        if (!external_cmd.contains(name))
            throw ConfigError("'agent." + name + ".timeout_ms' set but agent '" + name + "' has no command");
    }
    if (cfg.agents.empty()) throw ConfigError("'agents' lists no agent");
    std::set<std::string> listed;
    for (const auto& name : cfg.agents) {
        if (!listed.insert(name).second) throw ConfigError("agent '" + name + "' listed twice");
        if (auto it = external_cmd.find(name); it != external_cmd.end()) {
            ExternalAgentConfig ext{name, it->second, 1000};
            if (auto t = external_timeout.find(name); t != external_timeout.end())
                ext.timeout_ms = parse_positive<int>("agent." + name + ".timeout_ms", t->second);
            cfg.external.push_back(std::move(ext));
            continue;
        }
        try {
            builtin_agent(name, cfg.space);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    for (const auto& [name, cmd] : external_cmd)
        if (!listed.contains(name)) throw ConfigError("external agent '" + name + "' is not listed in 'agents'");

    switch (cfg.source) {
        case EnsembleSource::Native:
            if (cfg.native_environments.empty())
                throw ConfigError("'ensemble.source = native' needs 'ensemble.environments'");
            break;
        case EnsembleSource::File:
            if (cfg.fixture_file.empty()) throw ConfigError("'ensemble.source = file' needs 'ensemble.fixtures'");
            break;
        case EnsembleSource::Enumerate: break;
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

}  // namespace upsilon
