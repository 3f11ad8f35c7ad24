#include "upsilon/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace upsilon {

using json = nlohmann::json;

std::string format_number(double x) { return json(x).dump(); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::string source_name(EnsembleSource s) {
    switch (s) {
        case EnsembleSource::Enumerate: return "enumerate";
        case EnsembleSource::Native: return "native";
        case EnsembleSource::File: return "file";
    }
    return "?";
}

json length_of(const EnsembleMember& m) {
    return m.program ? json(m.program->length_bits()) : json(nullptr);
}

}  // namespace

json report_json(const RunConfig& cfg, const Ensemble& ensemble, const ComparisonReport& comparison,
                 const RunSummary& summary) {
    json env_rows = json::array();
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        const auto& m = ensemble.members[i];
        json values = json::array();
        for (const auto& r : comparison.results) {
            const auto& v = r.values[i];
            values.push_back({{"agent", r.agent},
                              {"mean", v.mean},
                              {"ci_half_width", v.ci_half_width},
                              {"episodes", v.episodes_used},
                              {"failed_episodes", v.failed_episodes},
                              {"truncation_bound", v.truncation_bound}});
        }
        env_rows.push_back({{"program_id", m.program_id},
                            {"id", m.source.id},
                            {"length_bits", length_of(m)},
                            {"program", m.program ? json(m.program->listing()) : json(nullptr)},
                            {"weight", m.weight},
                            {"raw_weight", m.raw_weight},
                            {"multiplicity", m.multiplicity},
                            {"values", std::move(values)}});
    }

    json agents = json::array();
    for (const auto& r : comparison.results) {
        const auto t = summary.timeout_warnings.find(r.agent);
        agents.push_back({{"name", r.agent},
                          {"upsilon", r.upsilon},
                          {"ci_half_width", r.ci_half_width},
                          {"failed_episodes", r.failed_episodes},
                          {"excluded_environments", r.excluded_environments},
                          {"timeout_warnings", t == summary.timeout_warnings.end() ? 0 : t->second}});
    }

    json pairs = json::array();
    for (const auto& p : comparison.pairs)
        pairs.push_back({{"first", p.first},
                         {"second", p.second},
                         {"difference", p.difference},
                         {"ci_low", p.ci_low},
                         {"ci_high", p.ci_high},
                         {"significant", p.significant}});

    const auto& v = cfg.valuation;
    return {{"schema_version", kReportSchemaVersion},
            {"tool", {{"name", "upsilon"}, {"version", UPSILON_VERSION}}},
            {"seed", cfg.seed},
            {"spaces",
             {{"actions", cfg.space.action_count},
              {"observations", cfg.space.observation_count},
              {"reward_denominator", cfg.space.reward_denominator}}},
            {"ensemble",
             {{"source", source_name(cfg.source)},
              {"max_length_bits", ensemble.max_length_bits},
              {"enumerated_count", ensemble.enumerated_count},
              {"member_count", ensemble.members.size()},
              {"kraft_sum", ensemble.kraft_sum},
              {"dedup", ensemble.dedup_mode},
              {"weight_scheme", ensemble.weight_scheme},
              {"renormalized", cfg.ensemble.renormalize},
              {"sampled", ensemble.sampled},
              {"weight_total", ensemble.weight_total()}}},
            {"valuation",
             {{"mode", std::string(mode_name(v.mode))},
              {"gamma", v.gamma},
              {"horizon", v.horizon},
              {"episodes", v.episodes},
              {"truncation_epsilon", v.trunc_epsilon},
              {"confidence", v.confidence}}},
            {"agents", std::move(agents)},
            {"ordering", comparison.ordering},
            {"comparisons", std::move(pairs)},
            {"environments", std::move(env_rows)}};
}

std::string rows_csv(const Ensemble& ensemble, const ComparisonReport& comparison) {
    std::ostringstream out;
    out << "program_id,length_bits,weight,agent,value_mean,value_ci,episodes\n";
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        const auto& m = ensemble.members[i];
        const std::string len = m.program ? std::to_string(m.program->length_bits()) : std::string();
        for (const auto& r : comparison.results) {
            const auto& v = r.values[i];
            out << m.program_id << ',' << len << ',' << format_number(m.weight) << ',' << r.agent << ','
                << format_number(v.mean) << ',' << format_number(v.ci_half_width) << ',' << v.episodes_used << '\n';
        }
    }
    return out.str();
}

json manifest_json(const RunConfig& cfg) {
    json config = json::array();
    for (const auto& [k, v] : cfg.entries) config.push_back({k, v});
    return {{"tool", "upsilon"},
            {"version", UPSILON_VERSION},
            {"seed", cfg.seed},
            {"config", std::move(config)},
            {"outputs", {"report.json", "rows.csv", "manifest.json"}},
            {"reproduce", "upsilon run <config>"}};
}

}  // namespace upsilon
