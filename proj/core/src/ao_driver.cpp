#include "maleo/ao_driver.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace maleo {

namespace {

constexpr int kRepulsionPasses = 200;

bool spacing_ok(const MaLayout& l) {
  return l.size() < 2 || l.min_spacing() >= l.d_min * (1.0 - 1e-9);
}

// Pushes too-close pairs apart symmetrically, clamped to the region and to
// the per-antenna step limit around `anchor`.
MaLayout repel(MaLayout l, const MaLayout& anchor, double max_step) {
  const double target = l.d_min * (1.0 + 1e-6);
  for (int pass = 0; pass < kRepulsionPasses && !spacing_ok(l); ++pass) {
    for (int i = 0; i < l.size(); ++i) {
      for (int j = i + 1; j < l.size(); ++j) {
        Vec2& a = l.q[static_cast<std::size_t>(i)];
        Vec2& b = l.q[static_cast<std::size_t>(j)];
        Vec2 d = a - b;
        const double len = d.norm();
        if (len >= target) continue;
        d = len > 0.0 ? Vec2(d / len) : Vec2(1.0, 0.0);
        const double push = 0.5 * (target - len);
        a += push * d;
        b -= push * d;
      }
    }
    for (int i = 0; i < l.size(); ++i) {
      Vec2& p = l.q[static_cast<std::size_t>(i)];
      p.x() = std::clamp(p.x(), l.region.x_min, l.region.x_max);
      p.y() = std::clamp(p.y(), l.region.y_min, l.region.y_max);
      const Vec2& o = anchor.q[static_cast<std::size_t>(i)];
      const double moved = (p - o).norm();
      if (moved > max_step) p = o + (p - o) * (max_step / moved);
    }
  }
  return l;
}

}  // namespace

MaLayout init_positions(const MaLayout& q_prev_slot, const MaLayout& q0, double max_step) {
  if (q0.size() != q_prev_slot.size()) throw DomainError("init_positions: size mismatch");
  const Vec prev = q_prev_slot.flat();
  const Vec diff = q0.flat() - prev;
  const double dist = diff.norm();
  if (dist == 0.0) return q_prev_slot;
  const double step = std::min(max_step, dist);
  for (double shrink = 1.0; shrink > 1e-3; shrink *= 0.5) {
    MaLayout cand = q_prev_slot.with_flat(prev + (shrink * step / dist) * diff);
    if (!spacing_ok(cand)) cand = repel(cand, q_prev_slot, max_step);
    if (spacing_ok(cand) && cand.in_region(1e-12) &&
        cand.max_displacement(q_prev_slot) <= max_step * (1.0 + 1e-12)) {
      return cand;
    }
  }
  return q_prev_slot;
}

SlotAudit audit_slot(const SlotProblem& problem, const TxCovariance& cov, const MaLayout& layout,
                     const MaLayout& q_prev_slot, double max_step, double sinr_tol_db) {
  SlotAudit a;
  const double total = cov.rx().trace().real();
  a.power = total <= problem.p_max * (1.0 + 1e-6);
  const LayoutCheck lc = check_layout(problem, cov, layout, q_prev_slot, max_step, sinr_tol_db);
  a.region = lc.region;
  a.spacing = lc.spacing;
  a.speed = lc.speed;
  a.sinr = lc.sinr;
  const SinrReport r = evaluate_sinr(problem.ces, problem.slot, layout, cov, problem.waveform);
  a.worst_sinr_margin_db = r.worst_margin_db();
  return a;
}

SlotResult solve_slot(const SlotProblem& problem, const MaLayout& q_prev_slot, const MaLayout& q0,
                      double max_step, const AoSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  SlotResult res;
  res.slot_index = problem.slot.index;

  MaLayout q = settings.move_antennas ? init_positions(q_prev_slot, q0, max_step) : q_prev_slot;

  // First covariance solve; infeasibility here means the scenario itself is
  // infeasible (threshold too high for this geometry and power).
  BeamformingSolution sol = solve_p4(problem, q, settings.solver);
  double f = scene_objective(problem.scene, problem.slot, q, sol.wc + sol.rs);

  if (settings.move_antennas) {
    for (int outer = 0; outer < settings.max_outer; ++outer) {
      if (outer > 0) {
        BeamformingSolution next = solve_p4(problem, q, settings.solver);
        const double fn = scene_objective(problem.scene, problem.slot, q, next.wc + next.rs);
        // The incumbent stays feasible at q, so a worse relaxed solution only
        // reflects solver tolerance: keep the incumbent.
        if (fn <= f) {
          sol = std::move(next);
          f = fn;
        }
      }
      const PositionResult pr =
          optimize_positions(problem, sol.covariance(), q, q_prev_slot, max_step, settings.position);
      q = pr.layout;
      const double f_new = std::min(f, pr.trace.back());
      res.trace.push_back(f_new);
      ++res.outer_iterations;
      const double previous = outer == 0 ? f : res.trace[res.trace.size() - 2];
      f = f_new;
      if (outer > 0 && (previous - f_new) / previous < settings.rel_tol) break;
    }
  } else {
    res.trace.push_back(f);
    res.outer_iterations = 1;
  }

  res.relaxed = sol;
  res.relaxed_objective = f;
  res.layout = q;
  res.cov = sol.covariance();

  if (settings.recover) {
    try {
      RecoveryResult rr = recover_rank1(sol, problem, q, settings.recovery, settings.solver);
      res.cov = rr.solution.covariance();
      res.recovered = true;
    } catch (const RecoveryError& e) {
      res.sdr_fallback = true;
      res.relaxed.sdr_fallback = true;
      res.message = e.what();
    }
  }

  const auto bundles = evaluate_scene(problem.scene, problem.slot, q, res.cov.rx());
  res.objective = sum_speb(bundles);
  for (const auto& b : bundles) res.speb.push_back(b.speb);
  res.sinr = evaluate_sinr(problem.ces, problem.slot, q, res.cov, problem.waveform);
  res.audit = audit_slot(problem, res.cov, q, q_prev_slot, max_step);
  res.ok = true;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

int HorizonResult::failures() const {
  return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const SlotResult& s) { return !s.ok; }));
}

double HorizonResult::mean_objective() const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : slots) {
    if (!r.ok) continue;
    s += r.objective;
    ++n;
  }
  return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
}

double HorizonResult::mean_peb() const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : slots) {
    if (!r.ok) continue;
    for (double v : r.speb) {
      s += std::sqrt(v);
      ++n;
    }
  }
  return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
}

HorizonResult run_horizon(const std::vector<SlotProblem>& slots, const MaLayout& q0,
                          double max_step, const AoSettings& settings, const SlotCallback& on_slot) {
  HorizonResult h;
  MaLayout prev = q0;
  for (const auto& problem : slots) {
    SlotResult r;
    try {
      r = solve_slot(problem, prev, q0, max_step, settings);
      prev = r.layout;
    } catch (const std::exception& e) {
      r = SlotResult{};
      r.slot_index = problem.slot.index;
      r.ok = false;
      r.message = e.what();
      r.layout = prev;
    }
    if (on_slot) on_slot(r);
    h.slots.push_back(std::move(r));
  }
  return h;
}

}  // namespace maleo
