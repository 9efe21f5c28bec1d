#include "maleo/experiments.hpp"

#include "maleo/beamforming.hpp"
#include "maleo/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <stdexcept>

namespace maleo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::optional<double> effective_threshold(const RunSpec& spec) {
  return spec.method == Method::Random ? std::nullopt : spec.threshold_db;
}

std::string run_label(const RunSpec& spec) {
  const auto thr = effective_threshold(spec);
  return std::string(to_string(spec.method)) + " p=" + short_num(spec.p_max_dbw) +
         " g=" + (thr ? short_num(*thr) : std::string("none"));
}

std::vector<SlotProblem> problems_for(const Scenario& sc, const RunSpec& spec) {
  auto problems = with_threshold(sc.problems, effective_threshold(spec));
  for (auto& p : problems) p.p_max = dbw_to_watts(spec.p_max_dbw);
  return problems;
}

std::uint64_t trial_seed(std::uint64_t seed, int slot, int trial) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(slot) * 0x100000001b3ULL +
                    static_cast<std::uint64_t>(trial) + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SlotResult random_slot(const Scenario& sc, const SlotProblem& problem, int trials) {
  const auto t0 = Clock::now();
  SlotResult r;
  r.slot_index = problem.slot.index;
  r.layout = sc.q0;
  const int k = problem.num_sensing();
  r.speb.assign(static_cast<std::size_t>(k), 0.0);
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    const TxCovariance cov = random_beamforming(
        sc.q0.size(), problem.p_max, trial_seed(sc.config.seed, problem.slot.index, t));
    if (t == 0) r.cov = cov;
    const auto bundles = evaluate_scene(problem.scene, problem.slot, sc.q0, cov.rx());
    total += sum_speb(bundles);
    for (int i = 0; i < k; ++i) r.speb[static_cast<std::size_t>(i)] += bundles[static_cast<std::size_t>(i)].speb;
  }
  for (double& v : r.speb) v /= trials;
  r.objective = total / trials;
  r.relaxed_objective = r.objective;
  r.trace = {r.objective};
  r.outer_iterations = 0;
  r.sinr = evaluate_sinr(problem.ces, problem.slot, sc.q0, r.cov, problem.waveform);
  r.audit = audit_slot(problem, r.cov, sc.q0, sc.q0, sc.max_step_m);
  r.ok = true;
  r.seconds = seconds_since(t0);
  return r;
}

std::string slot_message(const SlotResult& r, int slots) {
  char buf[160];
  if (r.ok) {
    std::snprintf(buf, sizeof buf, "slot %d/%d sum-SPEB %.4g m^2, %d outer, %.2f s%s",
                  r.slot_index, slots, r.objective, r.outer_iterations, r.seconds,
                  r.sdr_fallback ? " (SDR fallback)" : "");
  } else {
    std::snprintf(buf, sizeof buf, "slot %d/%d failed", r.slot_index, slots);
    return std::string(buf) + ": " + r.message;
  }
  return buf;
}

struct Collected {
  RunSpec spec;
  HorizonResult horizon;
};

class Runner {
 public:
  Runner(const Scenario& sc, ExperimentOutput& out, const ProgressFn& progress)
      : sc_(sc), out_(out), progress_(progress) {}

  const HorizonResult& run(const RunSpec& spec) {
    const auto t0 = Clock::now();
    runs_.push_back({spec, run_method(sc_, spec, progress_)});
    const Collected& c = runs_.back();
    const std::string label = run_label(spec);
    RunTiming timing{label, seconds_since(t0), c.horizon.failures(), 0.0};
    for (const auto& s : c.horizon.slots) {
      if (!s.ok) out_.failures.push_back(label + " slot " + std::to_string(s.slot_index) + ": " + s.message);
      timing.max_residual = std::max(timing.max_residual, s.relaxed.residuals.primal);
    }
    out_.timings.push_back(timing);
    record_solutions(sc_, spec, c.horizon, out_.solutions);
    return c.horizon;
  }

  RunSpec spec(Method m) const {
    return {m, sc_.config.power.p_max_dbw, sc_.config.power.sinr_threshold_db};
  }

 private:
  const Scenario& sc_;
  ExperimentOutput& out_;
  ProgressFn progress_;
  std::deque<Collected> runs_;  // stable references
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double slot_peb(const SlotResult& r) {
  if (!r.ok || r.speb.empty()) return nan();
  double s = 0.0;
  for (double v : r.speb) s += std::sqrt(v);
  return s / static_cast<double>(r.speb.size());
}

double slot_objective(const SlotResult& r) { return r.ok ? r.objective : nan(); }

std::vector<GeoAngles> map_points(const Scenario& sc, bool inside_only, std::vector<bool>* inside) {
  const auto& e = sc.config.experiment;
  const int n = e.map_samples;
  const double ext = deg2rad(e.map_extent_deg);
  const GeoAngles c = sc.config.coverage.center;
  std::vector<GeoAngles> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const GeoAngles p{c.theta - ext + 2.0 * ext * i / (n - 1), c.phi - ext + 2.0 * ext * j / (n - 1)};
      const bool in = great_circle_angle(p, c) <= sc.config.coverage.radius_rad;
      if (inside_only && !in) continue;
      pts.push_back(p);
      if (inside) inside->push_back(in);
    }
  }
  return pts;
}

CdfSummary cdf_from_horizon(const Scenario& sc, const HorizonResult& h,
                            std::optional<double> thr, const std::vector<GeoAngles>& pts) {
  CdfSummary c;
  c.threshold_db = thr;
  for (std::size_t m = 0; m < h.slots.size(); ++m) {
    if (!h.slots[m].ok) continue;
    for (const auto& p : pts) c.sinr_db.push_back(point_sinr_db(sc, sc.problems[m], h.slots[m], p));
  }
  std::sort(c.sinr_db.begin(), c.sinr_db.end());
  if (!thr) {
    c.satisfied_fraction = 1.0;
  } else if (!c.sinr_db.empty()) {
    const auto n = std::count_if(c.sinr_db.begin(), c.sinr_db.end(),
                                 [&](double v) { return v >= *thr - 0.01; });
    c.satisfied_fraction = static_cast<double>(n) / static_cast<double>(c.sinr_db.size());
  }
  return c;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---- experiments ------------------------------------------------------------

void convergence(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const auto& h = run.run(run.spec(Method::Proposed));
  Table t{"convergence", {"slot", "iteration", "sum_speb_m2"}, {}};
  Table s{"convergence_slots",
          {"slot", "outer_iterations", "relaxed_sum_speb_m2", "final_sum_speb_m2", "sdr_fallback"},
          {}};
  PlotSpec p{"convergence", "Objective per outer iteration", "iteration", "sum-SPEB (m^2)", {}, true};
  for (const auto& r : h.slots) {
    Series ser{"slot " + std::to_string(r.slot_index), {}, {}};
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      t.rows.push_back({double(r.slot_index), double(i + 1), r.trace[i]});
      ser.x.push_back(double(i + 1));
      ser.y.push_back(r.trace[i]);
    }
    s.rows.push_back({double(r.slot_index), double(r.outer_iterations), r.ok ? r.relaxed_objective : nan(),
                      slot_objective(r), r.sdr_fallback ? 1.0 : 0.0});
    p.series.push_back(std::move(ser));
  }
  (void)sc;
  out.tables = {t, s};
  out.plots = {p};
}

void sinr_map(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const auto& h = run.run(run.spec(Method::Proposed));
  std::vector<bool> inside;
  const auto pts = map_points(sc, false, &inside);
  Table t{"sinr_map", {"slot", "theta_deg", "phi_deg", "inside", "sinr_db"}, {}};
  for (std::size_t m = 0; m < h.slots.size(); ++m) {
    const SlotResult& r = h.slots[m];
    if (!r.ok) continue;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      t.rows.push_back({double(r.slot_index), rad2deg(pts[i].theta), rad2deg(pts[i].phi),
                        inside[i] ? 1.0 : 0.0, point_sinr_db(sc, sc.problems[m], r, pts[i])});
    }
  }
  // Slot-averaged profile along the latitude through the centre.
  PlotSpec p{"sinr_map", "SINR along the central latitude (slot mean)", "azimuth (deg)", "SINR (dB)", {}};
  const int n = sc.config.experiment.map_samples;
  const std::size_t per_slot = pts.size();
  const std::size_t slots_done = per_slot ? t.rows.size() / per_slot : 0;
  Series ser{"mean over slots", {}, {}};
  for (int j = 0; j < n && slots_done > 0; ++j) {
    const std::size_t local = static_cast<std::size_t>((n / 2) * n + j);
    double acc = 0.0;
    for (std::size_t m = 0; m < slots_done; ++m) acc += t.rows[m * per_slot + local][4];
    ser.x.push_back(rad2deg(pts[local].phi));
    ser.y.push_back(acc / static_cast<double>(slots_done));
  }
  p.series.push_back(ser);
  out.tables = {t};
  out.plots = {p};
}

void sinr_cdf_experiment(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const auto pts = map_points(sc, true, nullptr);
  std::vector<CdfSummary> cdfs;
  for (double g : sc.config.experiment.sinr_sweep_db) {
    cdfs.push_back(cdf_from_horizon(sc, run.run({Method::Proposed, sc.config.power.p_max_dbw, g}), g, pts));
  }
  Table t{"sinr_cdf", {"threshold_db", "sinr_db", "cdf"}, {}};
  Table s{"sinr_cdf_summary", {"threshold_db", "samples", "satisfied_fraction"}, {}};
  PlotSpec p{"sinr_cdf", "CDF of SINR within the coverage area", "SINR (dB)", "CDF", {}};
  for (const auto& c : cdfs) {
    const double thr = c.threshold_db ? *c.threshold_db : nan();
    Series ser{"threshold " + (c.threshold_db ? short_num(*c.threshold_db) + " dB" : std::string("none")), {}, {}};
    const double n = static_cast<double>(c.sinr_db.size());
    for (std::size_t i = 0; i < c.sinr_db.size(); ++i) {
      const double f = (i + 1) / n;
      t.rows.push_back({thr, c.sinr_db[i], f});
      ser.x.push_back(c.sinr_db[i]);
      ser.y.push_back(f);
    }
    s.rows.push_back({thr, n, c.satisfied_fraction});
    p.series.push_back(std::move(ser));
  }
  out.tables = {t, s};
  out.plots = {p};
}

void peb_vs_power(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const auto thr = sc.config.power.sinr_threshold_db;
  Table t{"peb_vs_power", {"p_max_dbw", "peb_proposed_m", "peb_bench1_m", "peb_bench2_m"}, {}};
  PlotSpec p{"peb_vs_power", "Average PEB versus transmit power", "P_max (dBW)", "average PEB (m)", {}, true};
  Series sp{"proposed", {}, {}}, s1{"benchmark 1 (random)", {}, {}}, s2{"benchmark 2 (fixed UPA)", {}, {}};
  for (double pw : sc.config.experiment.power_sweep_dbw) {
    const double a = run.run({Method::Proposed, pw, thr}).mean_peb();
    const double b1 = run.run({Method::Random, pw, thr}).mean_peb();
    const double b2 = run.run({Method::FixedUpa, pw, thr}).mean_peb();
    t.rows.push_back({pw, a, b1, b2});
    sp.x.push_back(pw), sp.y.push_back(a);
    s1.x.push_back(pw), s1.y.push_back(b1);
    s2.x.push_back(pw), s2.y.push_back(b2);
  }
  p.series = {sp, s1, s2};
  out.tables = {t};
  out.plots = {p};
}

void peb_vs_slot(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  (void)sc;
  const auto& a = run.run(run.spec(Method::Proposed));
  const auto& b2 = run.run(run.spec(Method::FixedUpa));
  const auto& b1 = run.run(run.spec(Method::Random));
  Table t{"peb_vs_slot", {"slot", "peb_proposed_m", "peb_bench1_m", "peb_bench2_m"}, {}};
  PlotSpec p{"peb_vs_slot", "Average PEB per slot", "slot", "average PEB (m)", {}, true};
  Series sp{"proposed", {}, {}}, s1{"benchmark 1 (random)", {}, {}}, s2{"benchmark 2 (fixed UPA)", {}, {}};
  for (std::size_t m = 0; m < a.slots.size(); ++m) {
    const double x = a.slots[m].slot_index;
    const double va = slot_peb(a.slots[m]), v1 = slot_peb(b1.slots[m]), v2 = slot_peb(b2.slots[m]);
    t.rows.push_back({x, va, v1, v2});
    sp.x.push_back(x), sp.y.push_back(va);
    s1.x.push_back(x), s1.y.push_back(v1);
    s2.x.push_back(x), s2.y.push_back(v2);
  }
  p.series = {sp, s1, s2};
  out.tables = {t};
  out.plots = {p};
}

void tradeoff(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const double pw = sc.config.power.p_max_dbw;
  Table t{"tradeoff", {"sinr_threshold_db", "peb_proposed_m", "peb_bench2_m", "min_sinr_proposed_db"}, {}};
  PlotSpec p{"tradeoff", "Sensing versus communication requirement", "SINR threshold (dB)",
             "average PEB (m)", {}};
  Series sp{"proposed", {}, {}}, s2{"benchmark 2 (fixed UPA)", {}, {}};
  for (double g : sc.config.experiment.sinr_sweep_db) {
    const auto& a = run.run({Method::Proposed, pw, g});
    const double va = a.mean_peb();
    double min_sinr = std::numeric_limits<double>::infinity();
    for (const auto& r : a.slots) {
      if (!r.ok) continue;
      for (double v : r.sinr.sinr) min_sinr = std::min(min_sinr, linear_to_db(v));
    }
    const double v2 = run.run({Method::FixedUpa, pw, g}).mean_peb();
    t.rows.push_back({g, va, v2, std::isfinite(min_sinr) ? min_sinr : nan()});
    sp.x.push_back(g), sp.y.push_back(va);
    s2.x.push_back(g), s2.y.push_back(v2);
  }
  p.series = {sp, s2};
  out.tables = {t};
  out.plots = {p};
}

void ma_trajectory(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  const auto& h = run.run(run.spec(Method::Proposed));
  Table t{"ma_trajectory", {"slot", "antenna", "x_m", "y_m"}, {}};
  PlotSpec p{"ma_trajectory", "Antenna positions per slot", "x (m)", "y (m)", {}, false, true};
  auto add = [&](int slot, const MaLayout& l) {
    Series ser{slot == 0 ? std::string("initial UPA") : "slot " + std::to_string(slot), {}, {}};
    for (int n = 0; n < l.size(); ++n) {
      const Vec2& q = l.q[static_cast<std::size_t>(n)];
      t.rows.push_back({double(slot), double(n + 1), q.x(), q.y()});
      ser.x.push_back(q.x());
      ser.y.push_back(q.y());
    }
    p.series.push_back(std::move(ser));
  };
  add(0, sc.q0);
  for (const auto& r : h.slots) {
    if (r.ok) add(r.slot_index, r.layout);
  }
  out.tables = {t};
  out.plots = {p};
}

void benchmarks(const Scenario& sc, Runner& run, ExperimentOutput& out) {
  (void)sc;
  const auto& a = run.run(run.spec(Method::Proposed));
  const auto& b2 = run.run(run.spec(Method::FixedUpa));
  const auto& b1 = run.run(run.spec(Method::Random));
  Table t{"benchmarks", {"slot", "speb_proposed_m2", "speb_bench2_m2", "speb_bench1_m2"}, {}};
  double ta = 0.0, t1 = 0.0, t2 = 0.0;
  for (std::size_t m = 0; m < a.slots.size(); ++m) {
    const double va = slot_objective(a.slots[m]), v2 = slot_objective(b2.slots[m]),
                 v1 = slot_objective(b1.slots[m]);
    t.rows.push_back({double(a.slots[m].slot_index), va, v2, v1});
    ta += va, t1 += v1, t2 += v2;
  }
  const double pa = a.mean_peb(), p2 = b2.mean_peb(), p1 = b1.mean_peb();
  Table s{"benchmarks_summary",
          {"sum_speb_proposed_m2", "sum_speb_bench2_m2", "sum_speb_bench1_m2", "peb_proposed_m",
           "peb_bench2_m", "peb_bench1_m", "peb_gain_vs_bench2"},
          {{ta, t2, t1, pa, p2, p1, 1.0 - pa / p2}}};
  PlotSpec p{"benchmarks", "Sum-SPEB per slot", "slot", "sum-SPEB (m^2)", {}, true};
  for (int col = 1; col <= 3; ++col) {
    Series ser{t.columns[static_cast<std::size_t>(col)], {}, {}};
    for (const auto& row : t.rows) {
      ser.x.push_back(row[0]);
      ser.y.push_back(row[static_cast<std::size_t>(col)]);
    }
    p.series.push_back(std::move(ser));
  }
  out.tables = {t, s};
  out.plots = {p};
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::FixedUpa: return "bench2";
    case Method::Random: return "bench1";
  }
  return "?";
}

HorizonResult run_method(const Scenario& sc, const RunSpec& spec, const ProgressFn& progress) {
  const auto problems = problems_for(sc, spec);
  const int slots = static_cast<int>(problems.size());
  const std::string label = run_label(spec);
  SlotCallback cb;
  if (progress) cb = [&](const SlotResult& r) { progress(label + ": " + slot_message(r, slots)); };

  if (spec.method == Method::Random) {
    HorizonResult h;
    for (const auto& p : problems) {
      SlotResult r;
      try {
        r = random_slot(sc, p, sc.config.experiment.random_trials);
      } catch (const std::exception& e) {
        r = SlotResult{};
        r.slot_index = p.slot.index;
        r.layout = sc.q0;
        r.message = e.what();
      }
      if (cb) cb(r);
      h.slots.push_back(std::move(r));
    }
    return h;
  }
  AoSettings s = sc.ao_settings();
  s.move_antennas = spec.method == Method::Proposed;
  return run_horizon(problems, sc.q0, sc.max_step_m, s, cb);
}

HorizonResult benchmark2_fixed_upa(const Scenario& scenario) {
  return run_method(scenario, {Method::FixedUpa, scenario.config.power.p_max_dbw,
                               scenario.config.power.sinr_threshold_db});
}

void record_solutions(const Scenario& sc, const RunSpec& spec, const HorizonResult& h,
                      std::vector<SolutionRecord>& out) {
  MaLayout prev = sc.q0;
  for (const auto& r : h.slots) {
    SolutionRecord rec;
    rec.run = run_label(spec);
    rec.method = spec.method;
    rec.p_max_dbw = spec.p_max_dbw;
    rec.threshold_db = effective_threshold(spec);
    rec.slot = r.slot_index;
    rec.ok = r.ok;
    rec.layout = r.layout;
    rec.q_prev = spec.method == Method::Proposed ? prev : sc.q0;
    rec.cov = r.cov;
    rec.objective = r.objective;
    rec.audit = r.audit;
    rec.sdr_fallback = r.sdr_fallback;
    if (r.ok) prev = r.layout;
    out.push_back(std::move(rec));
  }
}

double point_sinr_db(const Scenario& sc, const SlotProblem& problem, const SlotResult& result,
                     const GeoAngles& at) {
  CommTarget t;
  t.position = spherical_to_cartesian(at, sc.config.earth.radius_m);
  t.noise_power = dbm_to_watts(sc.config.power.noise_ce_dbm);
  t.threshold = 0.0;
  const CommLink link = comm_link(t, problem.slot, result.layout, problem.waveform);
  return linear_to_db(sinr(link, t.noise_power, result.cov));
}

std::vector<CdfSummary> sinr_cdf(const Scenario& sc,
                                 const std::vector<std::optional<double>>& thresholds,
                                 const ProgressFn& progress) {
  const auto pts = map_points(sc, true, nullptr);
  std::vector<CdfSummary> out;
  for (const auto& thr : thresholds) {
    out.push_back(cdf_from_horizon(
        sc, run_method(sc, {Method::Proposed, sc.config.power.p_max_dbw, thr}, progress), thr, pts));
  }
  return out;
}

bool is_experiment(std::string_view name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

ExperimentOutput run_experiment(std::string_view name, const Scenario& sc, const ProgressFn& progress) {
  if (!is_experiment(name)) throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
  const auto t0 = Clock::now();
  ExperimentOutput out;
  out.experiment = std::string(name);
  Runner run(sc, out, progress);
  if (name == "convergence") convergence(sc, run, out);
  else if (name == "sinr-map") sinr_map(sc, run, out);
  else if (name == "sinr-cdf") sinr_cdf_experiment(sc, run, out);
  else if (name == "peb-vs-power") peb_vs_power(sc, run, out);
  else if (name == "peb-vs-slot") peb_vs_slot(sc, run, out);
  else if (name == "tradeoff") tradeoff(sc, run, out);
  else if (name == "ma-trajectory") ma_trajectory(sc, run, out);
  else benchmarks(sc, run, out);

  const auto& c = sc.config;
  out.metadata = {
      {"experiment", out.experiment},
      {"scenario", c.name},
      {"seed", std::to_string(c.seed)},
      {"config_hash", hex(config_hash(c))},
      {"slots", std::to_string(c.orbit.slots)},
      {"n_tx", std::to_string(c.array.n_tx)},
      {"sensing_sites", std::to_string(c.sensing.sites.size())},
      {"grid_ces", std::to_string(sc.grid.size())},
      {"slot_failures", std::to_string(out.failures.size())},
  };
  out.seconds = seconds_since(t0);
  return out;
}

}  // namespace maleo
