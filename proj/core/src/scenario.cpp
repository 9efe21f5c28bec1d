#include "maleo/scenario.hpp"

#include "maleo/beamforming.hpp"
#include "maleo/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace maleo {

using nlohmann::json;

namespace {

// ---- reading ---------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  const json* section(const json& root, const std::string& key, bool required,
                      std::initializer_list<const char*> allowed) {
    auto it = root.find(key);
    if (it == root.end()) {
      if (required) issues_.push_back(key + ": missing section");
      return nullptr;
    }
    if (!it->is_object()) {
      issues_.push_back(key + ": expected an object");
      return nullptr;
    }
    unknown_keys(*it, key, allowed);
    return &*it;
  }

  void unknown_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!ok.count(it.key())) issues_.push_back(join(path, it.key()) + ": unknown key");
    }
  }

  void number(const json* obj, const std::string& path, const char* key, double& out,
              bool required = true) {
    const json* v = find(obj, path, key, required);
    if (!v) return;
    if (!v->is_number()) {
      issues_.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v->get<double>();
    if (!std::isfinite(out)) issues_.push_back(join(path, key) + ": must be finite");
  }

  void integer(const json* obj, const std::string& path, const char* key, int& out,
               bool required = true) {
    const json* v = find(obj, path, key, required);
    if (!v) return;
    if (!v->is_number_integer()) {
      issues_.push_back(join(path, key) + ": expected an integer");
      return;
    }
    out = v->get<int>();
  }

  // Number or null.
  void optional_number(const json* obj, const std::string& path, const char* key,
                       std::optional<double>& out, bool required = true) {
    const json* v = find(obj, path, key, required);
    if (!v) return;
    if (v->is_null()) {
      out.reset();
      return;
    }
    if (!v->is_number()) {
      issues_.push_back(join(path, key) + ": expected a number or null");
      return;
    }
    out = v->get<double>();
  }

  void string(const json* obj, const std::string& path, const char* key, std::string& out,
              bool required = true) {
    const json* v = find(obj, path, key, required);
    if (!v) return;
    if (!v->is_string()) {
      issues_.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = v->get<std::string>();
  }

  void numbers(const json* obj, const std::string& path, const char* key, std::vector<double>& out,
               bool required = true) {
    const json* v = find(obj, path, key, required);
    if (!v) return;
    if (!v->is_array()) {
      issues_.push_back(join(path, key) + ": expected an array of numbers");
      return;
    }
    std::vector<double> tmp;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        issues_.push_back(join(path, key) + "[" + std::to_string(i) + "]: expected a number");
        return;
      }
      tmp.push_back((*v)[i].get<double>());
    }
    out = std::move(tmp);
  }

  // [theta_deg, phi_deg]
  bool angle_pair(const json& v, const std::string& where, GeoAngles& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      issues_.push_back(where + ": expected [theta_deg, phi_deg]");
      return false;
    }
    out = {deg2rad(v[0].get<double>()), deg2rad(v[1].get<double>())};
    return true;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  const json* find(const json* obj, const std::string& path, const char* key, bool required) {
    if (!obj) return nullptr;
    auto it = obj->find(key);
    if (it == obj->end()) {
      if (required) issues_.push_back(join(path, key) + ": missing");
      return nullptr;
    }
    return &*it;
  }

  std::vector<std::string>& issues_;
};

const char* to_string(PathlossConvention c) {
  return c == PathlossConvention::Friis ? "friis" : "as-printed";
}
const char* to_string(SteeringConvention c) {
  return c == SteeringConvention::AsPrinted ? "as-printed" : "unit-direction";
}

json angles_json(const GeoAngles& a) { return json::array({rad2deg(a.theta), rad2deg(a.phi)}); }

// Reference sensing sites, in units of pi rad.
constexpr double kSitesPi[4][2] = {{-0.03, -0.01}, {-0.01, -0.03}, {0.01, 0.03}, {0.03, 0.01}};

}  // namespace

// ---- presets ----------------------------------------------------------------

ScenarioConfig paper_defaults() {
  ScenarioConfig c;
  c.name = "paper";
  for (const auto& s : kSitesPi) c.sensing.sites.push_back({s[0] * kPi, s[1] * kPi});
  c.array.d_min_m = c.waveform.wavelength_m / 2.0;
  c.array.region_half_m = 1.5 * c.waveform.wavelength_m;
  return c;
}

ScenarioConfig desk_defaults() { return apply_preset(paper_defaults(), "desk"); }

ScenarioConfig apply_preset(ScenarioConfig cfg, std::string_view preset) {
  if (preset == "desk") {
    cfg.name = "desk";
    cfg.array.n_tx = 8;
    cfg.array.n_rx = 4;
    cfg.orbit.slots = 4;
    if (cfg.sensing.sites.size() > 2) {
      cfg.sensing.sites = {cfg.sensing.sites.front(), cfg.sensing.sites.back()};
    }
    cfg.experiment.power_sweep_dbw = {10.0, 20.0, 30.0};
    cfg.experiment.sinr_sweep_db = {0.0, 6.0, 12.0};
    cfg.experiment.map_samples = 21;
    cfg.experiment.random_trials = 3;
  } else if (preset == "paper") {
    const ScenarioConfig p = paper_defaults();
    cfg.name = "paper";
    cfg.array.n_tx = p.array.n_tx;
    cfg.array.n_rx = p.array.n_rx;
    cfg.orbit.slots = p.orbit.slots;
    cfg.sensing.sites = p.sensing.sites;
    cfg.experiment = p.experiment;
  } else {
    throw ConfigError({"preset: unknown preset '" + std::string(preset) + "' (desk|paper)"});
  }
  return cfg;
}

// ---- validation ---------------------------------------------------------------

std::vector<std::string> ScenarioConfig::issues() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* path) {
    if (!(v > 0.0)) out.push_back(std::string(path) + ": must be positive");
  };
  auto at_least = [&](int v, int lo, const char* path) {
    if (v < lo) out.push_back(std::string(path) + ": must be >= " + std::to_string(lo));
  };

  positive(earth.radius_m, "earth.radius_m");
  positive(earth.grav_const, "earth.grav_const");
  positive(earth.mass_kg, "earth.mass_kg");
  positive(orbit.altitude_m, "orbit.altitude_m");
  if (!(orbit.inclination_rad >= 0.0 && orbit.inclination_rad <= kPi / 2)) {
    out.push_back("orbit.inclination_deg: must lie in [0, 90]");
  }
  at_least(orbit.sats_per_plane, 1, "orbit.sats_per_plane");
  at_least(orbit.slots, 1, "orbit.slots");

  positive(waveform.wavelength_m, "waveform.wavelength_m");
  at_least(waveform.samples, 1, "waveform.samples");
  if (!(waveform.pathloss_exponent >= 0.0)) {
    out.push_back("waveform.pathloss_exponent: must be non-negative");
  }

  positive(coverage.radius_rad, "coverage.radius_deg");
  at_least(coverage.lon_cells, 1, "coverage.lon_cells");
  at_least(coverage.lat_cells, 1, "coverage.lat_cells");
  if (std::abs(coverage.center.theta) > kPi / 2) {
    out.push_back("coverage.center_deg: latitude outside [-90, 90]");
  }

  if (sensing.sites.empty()) out.push_back("sensing.se_deg: at least one site required");
  for (std::size_t k = 0; k < sensing.sites.size(); ++k) {
    if (std::abs(sensing.sites[k].theta) > kPi / 2) {
      out.push_back("sensing.se_deg[" + std::to_string(k) + "]: latitude outside [-90, 90]");
    }
  }
  positive(sensing.amplitude_scale, "sensing.amplitude_scale");

  at_least(array.n_tx, 1, "array.n_tx");
  at_least(array.n_rx, 1, "array.n_rx");
  positive(array.d_min_m, "array.d_min_m");
  if (!(array.v_max_mps >= 0.0)) out.push_back("array.v_max_mps: must be non-negative");
  positive(array.region_half_m, "array.region_m");
  if (array.n_tx >= 1 && array.d_min_m > 0.0 && array.region_half_m > 0.0 &&
      waveform.wavelength_m > 0.0) {
    // Antennas per row/column of the reference grid must fit at d_min.
    int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(array.n_tx))));
    while (array.n_tx % rows != 0) --rows;
    const int cols = array.n_tx / rows;
    const double width = 2.0 * array.region_half_m;
    if (array.d_min_m * (cols - 1) > width * (1.0 + 1e-12)) {
      out.push_back("array.d_min_m: " + std::to_string(cols) +
                    " antennas per row do not fit in the region at this spacing");
    }
    const double half_wave = waveform.wavelength_m / 2.0;
    if (half_wave < array.d_min_m * (1.0 - 1e-12)) {
      out.push_back("array.d_min_m: exceeds the half-wavelength spacing of the reference array");
    }
    if (half_wave * (cols - 1) > width * (1.0 + 1e-12)) {
      out.push_back("array.region_m: half-wavelength reference array does not fit");
    }
  }

  if (!std::isfinite(power.p_max_dbw)) out.push_back("power.p_max_dbw: must be finite");
  if (!std::isfinite(power.noise_se_dbm)) out.push_back("power.noise_se_dbm: must be finite");
  if (!std::isfinite(power.noise_ce_dbm)) out.push_back("power.noise_ce_dbm: must be finite");

  positive(solver.feas_tol, "solver.feas_tol");
  positive(solver.gap_tol, "solver.gap_tol");
  at_least(solver.max_iterations, 1, "solver.max_iterations");
  at_least(solver.outer_max, 1, "solver.outer_max");
  positive(solver.outer_tol, "solver.outer_tol");
  at_least(solver.inner_max, 0, "solver.inner_max");
  positive(solver.inner_tol, "solver.inner_tol");
  at_least(solver.randomization_samples, 0, "solver.randomization_samples");
  positive(solver.rank_tol, "solver.rank_tol");

  at_least(experiment.map_samples, 2, "experiment.map_samples");
  positive(experiment.map_extent_deg, "experiment.map_extent_deg");
  at_least(experiment.random_trials, 1, "experiment.random_trials");
  if (experiment.power_sweep_dbw.empty()) out.push_back("experiment.power_sweep_dbw: empty");
  if (experiment.sinr_sweep_db.empty()) out.push_back("experiment.sinr_sweep_db: empty");
  return out;
}

void ScenarioConfig::validate() const {
  auto list = issues();
  if (!list.empty()) throw ConfigError(std::move(list));
}

// ---- JSON -----------------------------------------------------------------------

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("<root>: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"<root>: expected an object"});

  std::vector<std::string> issues;
  Reader r(issues);
  ScenarioConfig c = paper_defaults();
  r.unknown_keys(root, "", {"name", "earth", "orbit", "waveform", "coverage", "sensing", "array",
                            "power", "solver", "seed", "experiment"});
  r.string(&root, "", "name", c.name, false);

  if (const json* s = r.section(root, "earth", true, {"radius_m", "grav_const", "mass_kg"})) {
    r.number(s, "earth", "radius_m", c.earth.radius_m);
    r.number(s, "earth", "grav_const", c.earth.grav_const);
    r.number(s, "earth", "mass_kg", c.earth.mass_kg);
  }

  if (const json* s = r.section(root, "orbit", true,
                                {"altitude_m", "inclination_deg", "sats_per_plane", "slots",
                                 "initial_phase_deg"})) {
    r.number(s, "orbit", "altitude_m", c.orbit.altitude_m);
    double incl = rad2deg(c.orbit.inclination_rad);
    r.number(s, "orbit", "inclination_deg", incl);
    c.orbit.inclination_rad = deg2rad(incl);
    r.integer(s, "orbit", "sats_per_plane", c.orbit.sats_per_plane);
    r.integer(s, "orbit", "slots", c.orbit.slots);
    std::optional<double> phase;
    r.optional_number(s, "orbit", "initial_phase_deg", phase, false);
    c.orbit.initial_phase_rad = phase ? std::optional<double>(deg2rad(*phase)) : std::nullopt;
  }

  if (const json* s = r.section(root, "waveform", true,
                                {"wavelength_m", "samples", "pathloss_exponent", "gain_leo_dbi",
                                 "gain_ce_dbi", "pathloss_convention", "steering_convention"})) {
    r.number(s, "waveform", "wavelength_m", c.waveform.wavelength_m);
    r.integer(s, "waveform", "samples", c.waveform.samples);
    r.number(s, "waveform", "pathloss_exponent", c.waveform.pathloss_exponent);
    r.number(s, "waveform", "gain_leo_dbi", c.waveform.gain_leo_dbi);
    r.number(s, "waveform", "gain_ce_dbi", c.waveform.gain_ce_dbi);
    std::string pl = "as-printed";
    r.string(s, "waveform", "pathloss_convention", pl, false);
    if (pl == "as-printed") {
      c.waveform.pathloss = PathlossConvention::AsPrinted;
    } else if (pl == "friis") {
      c.waveform.pathloss = PathlossConvention::Friis;
    } else {
      issues.push_back("waveform.pathloss_convention: expected 'as-printed' or 'friis'");
    }
    std::string st = "unit-direction";
    r.string(s, "waveform", "steering_convention", st, false);
    if (st == "unit-direction") {
      c.waveform.steering = SteeringConvention::UnitDirection;
    } else if (st == "as-printed") {
      c.waveform.steering = SteeringConvention::AsPrinted;
    } else {
      issues.push_back("waveform.steering_convention: expected 'unit-direction' or 'as-printed'");
    }
  }

  if (const json* s = r.section(root, "coverage", true,
                                {"center_deg", "radius_deg", "lon_cells", "lat_cells"})) {
    if (auto it = s->find("center_deg"); it != s->end()) {
      r.angle_pair(*it, "coverage.center_deg", c.coverage.center);
    } else {
      issues.push_back("coverage.center_deg: missing");
    }
    double radius = rad2deg(c.coverage.radius_rad);
    r.number(s, "coverage", "radius_deg", radius);
    c.coverage.radius_rad = deg2rad(radius);
    r.integer(s, "coverage", "lon_cells", c.coverage.lon_cells);
    r.integer(s, "coverage", "lat_cells", c.coverage.lat_cells);
  }

  if (const json* s = r.section(root, "sensing", true,
                                {"se_deg", "amplitude_scale", "amplitude_phase_deg"})) {
    if (auto it = s->find("se_deg"); it == s->end()) {
      issues.push_back("sensing.se_deg: missing");
    } else if (!it->is_array()) {
      issues.push_back("sensing.se_deg: expected an array of [theta_deg, phi_deg]");
    } else {
      c.sensing.sites.clear();
      for (std::size_t k = 0; k < it->size(); ++k) {
        GeoAngles a;
        if (r.angle_pair((*it)[k], "sensing.se_deg[" + std::to_string(k) + "]", a)) {
          c.sensing.sites.push_back(a);
        }
      }
    }
    r.number(s, "sensing", "amplitude_scale", c.sensing.amplitude_scale, false);
    double phase = rad2deg(c.sensing.amplitude_phase_rad);
    r.number(s, "sensing", "amplitude_phase_deg", phase, false);
    c.sensing.amplitude_phase_rad = deg2rad(phase);
  }

  if (const json* s = r.section(root, "array", true,
                                {"n_tx", "n_rx", "d_min_m", "v_max_mps", "region_m"})) {
    r.integer(s, "array", "n_tx", c.array.n_tx);
    r.integer(s, "array", "n_rx", c.array.n_rx);
    r.number(s, "array", "d_min_m", c.array.d_min_m);
    r.number(s, "array", "v_max_mps", c.array.v_max_mps);
    r.number(s, "array", "region_m", c.array.region_half_m);
  }

  if (const json* s = r.section(root, "power", true,
                                {"p_max_dbw", "sinr_threshold_db", "noise_se_dbm",
                                 "noise_ce_dbm"})) {
    r.number(s, "power", "p_max_dbw", c.power.p_max_dbw);
    r.optional_number(s, "power", "sinr_threshold_db", c.power.sinr_threshold_db);
    r.number(s, "power", "noise_se_dbm", c.power.noise_se_dbm);
    r.number(s, "power", "noise_ce_dbm", c.power.noise_ce_dbm);
  }

  if (const json* s = r.section(root, "solver", false,
                                {"feas_tol", "gap_tol", "max_iterations", "outer_max", "outer_tol",
                                 "inner_max", "inner_tol", "randomization_samples", "rank_tol"})) {
    r.number(s, "solver", "feas_tol", c.solver.feas_tol, false);
    r.number(s, "solver", "gap_tol", c.solver.gap_tol, false);
    r.integer(s, "solver", "max_iterations", c.solver.max_iterations, false);
    r.integer(s, "solver", "outer_max", c.solver.outer_max, false);
    r.number(s, "solver", "outer_tol", c.solver.outer_tol, false);
    r.integer(s, "solver", "inner_max", c.solver.inner_max, false);
    r.number(s, "solver", "inner_tol", c.solver.inner_tol, false);
    r.integer(s, "solver", "randomization_samples", c.solver.randomization_samples, false);
    r.number(s, "solver", "rank_tol", c.solver.rank_tol, false);
  }

  if (auto it = root.find("seed"); it != root.end()) {
    if (it->is_number_unsigned()) {
      c.seed = it->get<std::uint64_t>();
    } else {
      issues.push_back("seed: expected a non-negative integer");
    }
  }

  if (const json* s = r.section(root, "experiment", false,
                                {"power_sweep_dbw", "sinr_sweep_db", "map_samples",
                                 "map_extent_deg", "random_trials"})) {
    r.numbers(s, "experiment", "power_sweep_dbw", c.experiment.power_sweep_dbw, false);
    r.numbers(s, "experiment", "sinr_sweep_db", c.experiment.sinr_sweep_db, false);
    r.integer(s, "experiment", "map_samples", c.experiment.map_samples, false);
    r.number(s, "experiment", "map_extent_deg", c.experiment.map_extent_deg, false);
    r.integer(s, "experiment", "random_trials", c.experiment.random_trials, false);
  }

  if (issues.empty()) issues = c.issues();
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"<file>: cannot open " + path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["earth"] = {{"radius_m", c.earth.radius_m},
                {"grav_const", c.earth.grav_const},
                {"mass_kg", c.earth.mass_kg}};
  j["orbit"] = {{"altitude_m", c.orbit.altitude_m},
                {"inclination_deg", rad2deg(c.orbit.inclination_rad)},
                {"sats_per_plane", c.orbit.sats_per_plane},
                {"slots", c.orbit.slots},
                {"initial_phase_deg", c.orbit.initial_phase_rad
                                          ? json(rad2deg(*c.orbit.initial_phase_rad))
                                          : json(nullptr)}};
  j["waveform"] = {{"wavelength_m", c.waveform.wavelength_m},
                   {"samples", c.waveform.samples},
                   {"pathloss_exponent", c.waveform.pathloss_exponent},
                   {"gain_leo_dbi", c.waveform.gain_leo_dbi},
                   {"gain_ce_dbi", c.waveform.gain_ce_dbi},
                   {"pathloss_convention", to_string(c.waveform.pathloss)},
                   {"steering_convention", to_string(c.waveform.steering)}};
  j["coverage"] = {{"center_deg", angles_json(c.coverage.center)},
                   {"radius_deg", rad2deg(c.coverage.radius_rad)},
                   {"lon_cells", c.coverage.lon_cells},
                   {"lat_cells", c.coverage.lat_cells}};
  json sites = json::array();
  for (const auto& s : c.sensing.sites) sites.push_back(angles_json(s));
  j["sensing"] = {{"se_deg", sites},
                  {"amplitude_scale", c.sensing.amplitude_scale},
                  {"amplitude_phase_deg", rad2deg(c.sensing.amplitude_phase_rad)}};
  j["array"] = {{"n_tx", c.array.n_tx},
                {"n_rx", c.array.n_rx},
                {"d_min_m", c.array.d_min_m},
                {"v_max_mps", c.array.v_max_mps},
                {"region_m", c.array.region_half_m}};
  j["power"] = {{"p_max_dbw", c.power.p_max_dbw},
                {"sinr_threshold_db",
                 c.power.sinr_threshold_db ? json(*c.power.sinr_threshold_db) : json(nullptr)},
                {"noise_se_dbm", c.power.noise_se_dbm},
                {"noise_ce_dbm", c.power.noise_ce_dbm}};
  j["solver"] = {{"feas_tol", c.solver.feas_tol},
                 {"gap_tol", c.solver.gap_tol},
                 {"max_iterations", c.solver.max_iterations},
                 {"outer_max", c.solver.outer_max},
                 {"outer_tol", c.solver.outer_tol},
                 {"inner_max", c.solver.inner_max},
                 {"inner_tol", c.solver.inner_tol},
                 {"randomization_samples", c.solver.randomization_samples},
                 {"rank_tol", c.solver.rank_tol}};
  j["seed"] = c.seed;
  j["experiment"] = {{"power_sweep_dbw", c.experiment.power_sweep_dbw},
                     {"sinr_sweep_db", c.experiment.sinr_sweep_db},
                     {"map_samples", c.experiment.map_samples},
                     {"map_extent_deg", c.experiment.map_extent_deg},
                     {"random_trials", c.experiment.random_trials}};
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) { return fnv1a(to_json(cfg)); }

ScenarioConfig perturb_sites(ScenarioConfig cfg, std::uint64_t seed, double jitter_rad) {
  if (seed == 0) return cfg;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter_rad, jitter_rad);
  for (auto& s : cfg.sensing.sites) {
    s.theta += u(rng);
    s.phi += u(rng);
  }
  return cfg;
}

// ---- scenario ----------------------------------------------------------------------

AoSettings Scenario::ao_settings() const {
  const SolverConfig& s = config.solver;
  AoSettings a;
  a.solver.feas_tol = s.feas_tol;
  a.solver.gap_tol = s.gap_tol;
  a.solver.max_iterations = s.max_iterations;
  a.position.solver = a.solver;
  a.position.max_iterations = s.inner_max;
  a.position.rel_tol = s.inner_tol;
  a.recovery.samples = s.randomization_samples;
  a.recovery.rank_tol = s.rank_tol;
  a.recovery.seed = config.seed;
  a.recovery.threads = solver_threads_from_env();
  a.max_outer = s.outer_max;
  a.rel_tol = s.outer_tol;
  return a;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  sc.period_s = orbital_period(cfg.earth, cfg.orbit.altitude_m);
  sc.interval_s = sc.period_s / cfg.orbit.sats_per_plane;
  sc.max_step_m = cfg.array.v_max_mps * sc.interval_s / cfg.orbit.slots;
  sc.slots = build_slots(cfg.earth, cfg.orbit);
  sc.grid = build_coverage_grid(cfg.coverage.center, cfg.coverage.radius_rad,
                                cfg.coverage.lon_cells, cfg.coverage.lat_cells);

  const double lambda = cfg.waveform.wavelength_m;
  for (const auto& a : cfg.sensing.sites) {
    sc.sites.push_back(ReceiveSite::at(a, cfg.earth.radius_m,
                                       UpaLayout::east_north_grid(cfg.array.n_rx, lambda / 2.0)));
  }

  sc.q0.q = planar_grid(cfg.array.n_tx, lambda / 2.0);
  sc.q0.region = cfg.region();
  sc.q0.d_min = cfg.array.d_min_m;
  sc.q0.v_max = cfg.array.v_max_mps;

  std::vector<CommTarget> ces;
  for (const auto& g : sc.grid.centers) {
    CommTarget t;
    t.position = spherical_to_cartesian(g, cfg.earth.radius_m);
    t.noise_power = dbm_to_watts(cfg.power.noise_ce_dbm);
    t.threshold = cfg.power.sinr_threshold_db ? db_to_linear(*cfg.power.sinr_threshold_db) : 0.0;
    ces.push_back(t);
  }

  const cplx phase = std::polar(1.0, cfg.sensing.amplitude_phase_rad);
  for (const auto& slot : sc.slots) {
    SlotProblem p;
    p.slot = slot;
    p.ces = ces;
    p.waveform = cfg.waveform;
    p.p_max = cfg.p_max_w();
    p.scene.samples = cfg.waveform.samples;
    p.scene.earth_radius_m = cfg.earth.radius_m;
    p.scene.wavelength_m = lambda;
    p.scene.steering = cfg.waveform.steering;
    for (const auto& site : sc.sites) {
      SensingTarget t;
      t.site = site;
      const double d = (slot.p_leo - site.position).norm();
      t.amplitude = cfg.sensing.amplitude_scale * std::sqrt(path_loss(d, cfg.waveform)) * phase;
      t.noise_power = dbm_to_watts(cfg.power.noise_se_dbm);
      p.scene.targets.push_back(t);
    }
    sc.problems.push_back(std::move(p));
  }
  return sc;
}

std::vector<SlotProblem> with_threshold(std::vector<SlotProblem> problems,
                                        std::optional<double> threshold_db) {
  const double t = threshold_db ? db_to_linear(*threshold_db) : 0.0;
  for (auto& p : problems) {
    for (auto& ce : p.ces) ce.threshold = t;
  }
  return problems;
}

}  // namespace maleo
