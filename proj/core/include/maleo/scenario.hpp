// Scenario configuration (JSON at the boundary, linear SI units inside),
// presets, validation with key paths, and construction of the per-slot
// problems.
#pragma once

#include "maleo/ao_driver.hpp"
#include "maleo/array_channel.hpp"
#include "maleo/geometry.hpp"
#include "maleo/slot_problem.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maleo {

struct CoverageConfig {
  GeoAngles center;             // rad
  double radius_rad = deg2rad(3.0);
  int lon_cells = 100;
  int lat_cells = 50;
};

struct SensingConfig {
  std::vector<GeoAngles> sites;  // rad
  double amplitude_scale = 1.0;  // multiplies sqrt(path loss)
  double amplitude_phase_rad = 0.0;
};

struct ArrayConfig {
  int n_tx = 16;
  int n_rx = 16;
  double d_min_m = 0.075;
  double v_max_mps = 0.075;
  double region_half_m = 0.225;  // C = [-h, h]^2
};

struct PowerConfig {
  double p_max_dbw = 20.0;
  std::optional<double> sinr_threshold_db = 6.0;  // unset: no SINR rows
  double noise_se_dbm = -110.0;
  double noise_ce_dbm = -110.0;
};

struct SolverConfig {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 200;
  int outer_max = 50;
  double outer_tol = 1e-3;
  int inner_max = 40;
  double inner_tol = 1e-6;
  int randomization_samples = 100;
  double rank_tol = 1e-6;
};

struct ExperimentConfig {
  std::vector<double> power_sweep_dbw{10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<double> sinr_sweep_db{0.0, 3.0, 6.0, 9.0, 12.0};
  int map_samples = 41;           // per axis
  double map_extent_deg = 4.0;    // half-width around the coverage centre
  int random_trials = 5;          // random-beamforming draws averaged per slot
};

struct ScenarioConfig {
  std::string name = "paper";
  EarthModel earth;
  OrbitConfig orbit;
  WaveformConfig waveform;
  CoverageConfig coverage;
  SensingConfig sensing;
  ArrayConfig array;
  PowerConfig power;
  SolverConfig solver;
  std::uint64_t seed = 1;
  ExperimentConfig experiment;

  double p_max_w() const { return dbw_to_watts(power.p_max_dbw); }
  Region2 region() const {
    return {-array.region_half_m, array.region_half_m, -array.region_half_m, array.region_half_m};
  }
  /// Collects every violated rule; empty when valid.
  std::vector<std::string> issues() const;
  /// Throws ConfigError when issues() is non-empty.
  void validate() const;
};

/// Full-scale setup of the reference simulation.
ScenarioConfig paper_defaults();
/// Small setup for interactive runs and CI: N_t=8, N_r=4, K=2, M=4.
ScenarioConfig desk_defaults();
/// Overrides the fields that differ between presets ("desk" or "paper").
ScenarioConfig apply_preset(ScenarioConfig cfg, std::string_view preset);

/// Parses and validates; throws ConfigError listing key paths.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, boundary units).
std::string to_json(const ScenarioConfig& cfg);
/// FNV-1a 64 of to_json(cfg).
std::uint64_t config_hash(const ScenarioConfig& cfg);
std::uint64_t fnv1a(std::string_view bytes);

/// Moves every sensing site by a uniform offset in [-jitter, jitter]^2 (rad),
/// drawn from `seed`. Seed 0 returns the input unchanged.
ScenarioConfig perturb_sites(ScenarioConfig cfg, std::uint64_t seed, double jitter_rad);

/// Everything derived from a config.
struct Scenario {
  ScenarioConfig config;
  double period_s = 0.0;
  double interval_s = 0.0;
  double max_step_m = 0.0;  // v_max * T / M
  std::vector<SlotGeometry> slots;
  CoverageGrid grid;
  std::vector<ReceiveSite> sites;
  MaLayout q0;  // half-wavelength UPA
  std::vector<SlotProblem> problems;

  /// Solver/position/recovery settings from the config.
  AoSettings ao_settings() const;
};

Scenario build_scenario(const ScenarioConfig& cfg);

/// Problems with every CE threshold replaced (nullopt disables SINR rows).
std::vector<SlotProblem> with_threshold(std::vector<SlotProblem> problems,
                                        std::optional<double> threshold_db);

}  // namespace maleo
