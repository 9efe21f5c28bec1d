// maleo: validate configs, run experiments, audit result directories.
#include "maleo/errors.hpp"
#include "maleo/experiments.hpp"
#include "maleo/report.hpp"
#include "maleo/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kAuditFailed = 1;
constexpr int kInvalid = 2;
constexpr int kSolverFailure = 3;

int cmd_validate(const std::string& path, const std::string& preset) {
  maleo::ScenarioConfig cfg = maleo::load_config(path);
  if (!preset.empty()) cfg = maleo::apply_preset(cfg, preset);
  cfg.validate();
  const maleo::Scenario sc = maleo::build_scenario(cfg);
  std::printf("%s: ok (%s, N_t=%d, K=%zu, L=%zu, M=%d, slot interval %.2f s, step %.4g m)\n",
              path.c_str(), cfg.name.c_str(), cfg.array.n_tx, cfg.sensing.sites.size(),
              sc.grid.size(), cfg.orbit.slots, sc.interval_s, sc.max_step_m);
  if (sc.grid.empty()) std::printf("warning: the coverage grid holds no CE (L = 0)\n");
  return kOk;
}

int cmd_run(const std::string& experiment, const std::string& config, const std::string& out_dir,
            const std::string& preset, std::optional<std::uint64_t> seed, bool quiet) {
  if (!maleo::is_experiment(experiment)) {
    std::string names;
    for (auto n : maleo::kExperiments) names += std::string(names.empty() ? "" : ", ") + std::string(n);
    std::fprintf(stderr, "unknown experiment '%s' (one of: %s)\n", experiment.c_str(), names.c_str());
    return kInvalid;
  }
  maleo::ScenarioConfig cfg = config.empty() ? maleo::paper_defaults() : maleo::load_config(config);
  if (!preset.empty()) cfg = maleo::apply_preset(cfg, preset);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const maleo::Scenario sc = maleo::build_scenario(cfg);

  maleo::ProgressFn progress;
  if (!quiet) progress = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
  const maleo::ExperimentOutput out = maleo::run_experiment(experiment, sc, progress);
  maleo::write_output(out, cfg, out_dir);
  std::printf("%s: wrote %zu table(s) to %s in %.1f s\n", experiment.c_str(), out.tables.size(),
              out_dir.c_str(), out.seconds);
  if (!out.failures.empty()) {
    for (const auto& f : out.failures) std::fprintf(stderr, "failure: %s\n", f.c_str());
    return kSolverFailure;
  }
  return kOk;
}

int cmd_audit(const std::string& dir) {
  const maleo::AuditReport rep = maleo::audit_directory(dir);
  for (const auto& p : rep.problems) std::printf("FAIL %s\n", p.c_str());
  std::printf("%s: %d record(s), %d table(s), %s\n", dir.c_str(), rep.records, rep.tables,
              rep.ok() ? "all checks passed" : "audit failed");
  return rep.ok() ? kOk : kAuditFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint beamforming and movable-antenna design for LEO ISAC"};
  app.set_version_flag("--version", std::string(maleo::version()));
  app.require_subcommand(1);

  std::string cfg_path, preset, experiment, out_dir, audit_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto* validate = app.add_subcommand("validate", "Validate a scenario configuration");
  validate->add_option("config", cfg_path, "Scenario JSON file")->required();
  validate->add_option("--preset", preset, "Apply a preset before validating")
      ->check(CLI::IsMember({"desk", "paper"}));

  auto* run = app.add_subcommand("run", "Run an experiment and write its outputs");
  run->add_option("experiment", experiment, "Experiment name")->required();
  run->add_option("--config", cfg_path, "Scenario JSON file (default: built-in reference setup)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--preset", preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--seed", seed, "Override the config seed");
  run->add_flag("-q,--quiet", quiet, "No per-slot progress on stderr");

  auto* audit = app.add_subcommand("audit", "Re-check a result directory");
  audit->add_option("dir", audit_dir, "Result directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(cfg_path, preset);
    if (*run) return cmd_run(experiment, cfg_path, out_dir, preset, seed, quiet);
    return cmd_audit(audit_dir);
  } catch (const maleo::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverFailure;
  }
}
