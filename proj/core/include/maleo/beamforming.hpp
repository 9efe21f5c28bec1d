// Transmit covariance design at fixed antenna positions: the semidefinite
// relaxation (SDR) program, its solution, Gaussian-randomization rank-1
// recovery and the random-beamforming benchmark.
#pragma once

#include "maleo/conic.hpp"
#include "maleo/slot_problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace maleo {

/// Per-SE congruence scaling applied to the Schur-complement blocks so every
/// LMI entry is O(1): Z'_k = Z_k / c_k and J'_k = D_k J_k D_k / P.
struct P4Scaling {
  double power = 1.0;
  std::vector<double> z_scale;          // c_k
  std::vector<Eigen::Vector4d> fim_scale;  // diagonal of D_k
};

struct P4Program {
  ConicProgram program;
  int n_t = 0;
  int wc_offset = -1;  // -1 when Wc is fixed
  int rs_offset = -1;
  std::vector<int> z_offsets;
  P4Scaling scaling;
  std::optional<CMat> fixed_wc;
  int sinr_rows = 0;
  /// Scaled isotropic covariances with Z from the Schur complement; strictly
  /// feasible whenever the SINR rows leave room for it.
  Vec start;
};

/// Builds the relaxed program. With `fixed_wc` set, Wc is a constant and only
/// (Rs, Z_k) remain free; the candidate re-solve of the randomization uses it.
P4Program build_p4(const SlotProblem& problem, const MaLayout& layout,
                   const std::optional<CMat>& fixed_wc = std::nullopt);

struct BeamformingSolution {
  CMat wc;
  CMat rs;
  std::vector<Mat3> z;
  std::optional<CVec> w;  // set once a rank-1 beam is known
  double objective = 0.0;  // sum_k Tr(Z_k), m^2
  SolveStatus status = SolveStatus::Failed;
  SolveResiduals residuals;
  int iterations = 0;
  bool sdr_fallback = false;  // rank-1 recovery failed, Wc kept as is

  TxCovariance covariance() const;
};

/// Solves a program from build_p4. Throws InfeasibleError (with the binding
/// constraint) on infeasibility and std::runtime_error on solver failure.
BeamformingSolution solve_beamforming(const P4Program& p4, const SolverSettings& settings = {});

BeamformingSolution solve_p4(const SlotProblem& problem, const MaLayout& layout,
                             const SolverSettings& settings = {});

struct RecoverySettings {
  int samples = 100;
  double rank_tol = 1e-6;  // lambda_2 / lambda_1
  std::uint64_t seed = 1;
  int threads = 1;
};

struct RecoveryResult {
  BeamformingSolution solution;  // w set, Wc = w w^H
  bool already_rank_one = false;
  int candidates = 0;
  int feasible = 0;
  int chosen = -1;  // 0 = principal eigenvector, 1.. = random draws
};

/// Gaussian randomization. Each candidate is scaled so that no CE receives
/// less signal than under the relaxed Wc, then (Rs, Z) are re-solved with Wc
/// fixed to its outer product; the smallest objective wins (ties: lowest
/// index). Throws RecoveryError when no candidate is feasible.
RecoveryResult recover_rank1(const BeamformingSolution& sdr, const SlotProblem& problem,
                             const MaLayout& layout, const RecoverySettings& settings,
                             const SolverSettings& solver = {});

/// Random beam direction and random PSD sensing covariance with a random
/// power split; Tr(Wc + Rs) = p_max.
TxCovariance random_beamforming(int n_t, double p_max, std::uint64_t seed);

/// Thread count from MALEO_SOLVER_THREADS (default 1, minimum 1).
int solver_threads_from_env();

}  // namespace maleo
