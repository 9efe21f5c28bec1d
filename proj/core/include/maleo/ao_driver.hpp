// Alternating optimization within a slot (transmit covariance, then antenna
// positions), slot chaining through the speed limit, initialization and final
// rank-1 recovery.
#pragma once

#include "maleo/beamforming.hpp"
#include "maleo/position_sca.hpp"
#include "maleo/slot_problem.hpp"

#include <functional>
#include <string>
#include <vector>

namespace maleo {

struct AoSettings {
  SolverSettings solver;
  PositionSettings position;
  RecoverySettings recovery;
  int max_outer = 50;
  double rel_tol = 1e-3;
  bool move_antennas = true;  // false: fixed-array benchmark
  bool recover = true;        // Gaussian randomization after the loop
};

/// Moves q_prev toward q0 by at most max_step (norm of the whole stacked
/// vector). Broken spacing is repaired by a repulsion pass, then by shrinking
/// the step; if nothing works q_prev is returned.
MaLayout init_positions(const MaLayout& q_prev_slot, const MaLayout& q0, double max_step);

struct SlotAudit {
  bool power = true;
  bool sinr = true;
  bool region = true;
  bool spacing = true;
  bool speed = true;
  double worst_sinr_margin_db = 0.0;

  bool ok() const noexcept { return power && sinr && region && spacing && speed; }
};

/// Independent check of a final tuple against the original constraints.
SlotAudit audit_slot(const SlotProblem& problem, const TxCovariance& cov, const MaLayout& layout,
                     const MaLayout& q_prev_slot, double max_step, double sinr_tol_db = 0.01);

struct SlotResult {
  int slot_index = 0;
  bool ok = false;
  std::string message;

  MaLayout layout;
  TxCovariance cov;             // final (rank-1 when recovered)
  BeamformingSolution relaxed;  // last accepted relaxed solution
  std::vector<double> trace;    // true sum-SPEB after each (covariance, positions) pair
  int outer_iterations = 0;
  double relaxed_objective = 0.0;  // sum-SPEB at (layout, relaxed Wc + Rs)
  double objective = 0.0;          // sum-SPEB at the final tuple
  std::vector<double> speb;        // per SE, final tuple
  SinrReport sinr;
  SlotAudit audit;
  bool recovered = false;
  bool sdr_fallback = false;
  double seconds = 0.0;
};

SlotResult solve_slot(const SlotProblem& problem, const MaLayout& q_prev_slot, const MaLayout& q0,
                      double max_step, const AoSettings& settings = {});

struct HorizonResult {
  std::vector<SlotResult> slots;

  int failures() const;
  double mean_objective() const;
  double mean_peb() const;  // mean over slots and SEs of sqrt(SPEB)
};

using SlotCallback = std::function<void(const SlotResult&)>;

/// Slots in order; slot m starts from the layout of slot m-1 (q0 for m = 1).
/// A failed slot is recorded and the chain continues from the last good layout.
HorizonResult run_horizon(const std::vector<SlotProblem>& slots, const MaLayout& q0,
                          double max_step, const AoSettings& settings = {},
                          const SlotCallback& on_slot = {});

}  // namespace maleo
