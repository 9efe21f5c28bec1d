// Result-directory output (CSV with a metadata header, SVG plots, JSON
// records) and the independent audit of a result directory.
#pragma once

#include "maleo/experiments.hpp"
#include "maleo/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace maleo {

const char* version();

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" otherwise.
std::string format_number(double v);

std::string render_csv(const Table& table,
                       const std::vector<std::pair<std::string, std::string>>& metadata);

/// Minimal line/scatter chart.
std::string render_svg(const PlotSpec& plot);

std::string solutions_json(const std::vector<SolutionRecord>& records);
std::vector<SolutionRecord> parse_solutions(const std::string& json_text, const ScenarioConfig& cfg);

/// Writes <dir>/<table>.csv, <dir>/<plot>.svg, config.json, solutions.json and
/// run.json (timings and failures; the only non-deterministic file).
void write_output(const ExperimentOutput& out, const ScenarioConfig& cfg,
                  const std::filesystem::path& dir);

struct AuditReport {
  int records = 0;
  int tables = 0;
  std::vector<std::string> problems;

  bool ok() const noexcept { return problems.empty(); }
};

/// Re-checks every stored solution against the original constraints using
/// only config.json, compares the recorded audit flags and objectives, and
/// checks the config hash in every CSV header.
AuditReport audit_directory(const std::filesystem::path& dir);

}  // namespace maleo
