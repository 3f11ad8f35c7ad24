#pragma once

// report.json / rows.csv / manifest.json emission. Numbers in the CSV are
// printed with the JSON serializer so both files carry the same digits.

#include "upsilon/measure.hpp"
#include "upsilon/run_config.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace upsilon {

inline constexpr int kReportSchemaVersion = 1;

struct RunSummary {
    std::map<std::string, std::uint64_t> timeout_warnings;  // external agents only
};

nlohmann::json report_json(const RunConfig& cfg, const Ensemble& ensemble, const ComparisonReport& comparison,
                           const RunSummary& summary = {});

std::string rows_csv(const Ensemble& ensemble, const ComparisonReport& comparison);

/// Config echo, seed, tool version and output file names.
nlohmann::json manifest_json(const RunConfig& cfg);

/// Shortest round-trip text of a double, as used in both report formats.
std::string format_number(double x);

/// Writes text to path, creating parent directories. Throws std::runtime_error.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace upsilon
