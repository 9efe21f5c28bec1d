// Experiment orchestration: the proposed method, the two fixed-array
// benchmarks, and the sweeps and maps built from them.
#pragma once

#include "maleo/ao_driver.hpp"
#include "maleo/scenario.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace maleo {

enum class Method {
  Proposed,  // joint covariance and antenna positions
  FixedUpa,  // same covariance design, antennas fixed at the half-wavelength UPA
  Random,    // random beamforming at the UPA, no SINR constraint
};

const char* to_string(Method m);

struct RunSpec {
  Method method = Method::Proposed;
  double p_max_dbw = 20.0;
  std::optional<double> threshold_db;  // nullopt: no SINR rows
};

/// One slot of one run, enough to re-audit it from config.json alone.
struct SolutionRecord {
  std::string run;  // e.g. "proposed p=20 g=6"
  Method method = Method::Proposed;
  double p_max_dbw = 0.0;
  std::optional<double> threshold_db;
  int slot = 0;
  bool ok = false;
  MaLayout layout;
  MaLayout q_prev;
  TxCovariance cov;
  double objective = 0.0;
  SlotAudit audit;
  bool sdr_fallback = false;
};

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string name;  // file stem
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_y = false;
  bool markers_only = false;
};

struct RunTiming {
  std::string run;
  double seconds = 0.0;
  int failures = 0;
  double max_residual = 0.0;
};

struct ExperimentOutput {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<PlotSpec> plots;
  /// Deterministic key/value pairs written into every CSV header.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> failures;  // "run slot m: message"
  std::vector<SolutionRecord> solutions;
  std::vector<RunTiming> timings;
  double seconds = 0.0;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs one method over all slots of the scenario at the given power and
/// threshold. Random-benchmark objectives are averaged over
/// `experiment.random_trials` draws.
HorizonResult run_method(const Scenario& scenario, const RunSpec& spec,
                         const ProgressFn& progress = {});

/// The fixed-array benchmark at the scenario's own power and threshold.
HorizonResult benchmark2_fixed_upa(const Scenario& scenario);

/// Appends one SolutionRecord per slot.
void record_solutions(const Scenario& scenario, const RunSpec& spec, const HorizonResult& h,
                      std::vector<SolutionRecord>& out);

/// SINR in dB at an arbitrary ground point for a solved slot.
double point_sinr_db(const Scenario& scenario, const SlotProblem& problem,
                     const SlotResult& result, const GeoAngles& at);

/// Satisfaction statistics of SINR samples within the coverage area.
struct CdfSummary {
  std::optional<double> threshold_db;
  std::vector<double> sinr_db;  // sorted
  double satisfied_fraction = 0.0;
};

/// One proposed run per threshold, sampled on the experiment map grid
/// restricted to the coverage radius.
std::vector<CdfSummary> sinr_cdf(const Scenario& scenario,
                                 const std::vector<std::optional<double>>& thresholds,
                                 const ProgressFn& progress = {});

inline constexpr std::string_view kExperiments[] = {
    "convergence", "sinr-map", "sinr-cdf", "peb-vs-power",
    "peb-vs-slot", "tradeoff", "ma-trajectory", "benchmarks"};

bool is_experiment(std::string_view name);

/// Throws std::invalid_argument for an unknown name. Per-slot failures are
/// collected in the output rather than thrown.
ExperimentOutput run_experiment(std::string_view name, const Scenario& scenario,
                                const ProgressFn& progress = {});

}  // namespace maleo
