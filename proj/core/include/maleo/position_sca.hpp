// Antenna-position subproblem at a fixed transmit covariance: successive
// convex approximation with a linearized objective, linearized spacing,
// quadratic cosine bounds on the SINR constraint, and a line search along
// the resulting descent direction.
#pragma once

#include "maleo/conic.hpp"
#include "maleo/metrics.hpp"
#include "maleo/slot_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace maleo {

struct PositionSettings {
  SolverSettings solver;
  int max_iterations = 40;
  double rel_tol = 1e-6;
  int omega_samples = 21;  // uniform grid on [0, 1]
  int golden_iterations = 10;
  double rank_tol = 1e-8;
  double fd_step_wavelengths = 1e-4;
};

/// Eigen-decomposition of a Hermitian PSD matrix with the eigenvector
/// entries split into amplitudes and phases: u_r[n] = amp(n, r) e^{j phase(n, r)}.
struct EigenExpansion {
  Vec lambda;  // kept eigenvalues, descending
  CMat u;      // matching eigenvectors (columns)
  Mat amp;
  Mat phase;

  int rank() const noexcept { return static_cast<int>(lambda.size()); }
  CMat reconstruct() const;
};

/// Drops eigenpairs with lambda < rank_tol * lambda_max (and all of them for a
/// zero matrix).
EigenExpansion eig_expand(const CMat& m, double rank_tol = 1e-8);

/// cos(v^T dq + phase) expanded around dq0.
struct CosineLinearization {
  Vec2 v = Vec2::Zero();
  Vec2 dq0 = Vec2::Zero();
  double phase = 0.0;

  double exact(const Vec2& dq) const { return std::cos(v.dot(dq) + phase); }
};

/// (f_lb, f_ub) = cos0 - sin0 t -+ t^2 / 2 with t = v^T (dq - dq0).
std::pair<double, double> cos_bounds(const CosineLinearization& lin, const Vec2& dq);

/// (dq0)^T dq / |dq0| with dq = q_n - q_m, dq0 = q0_n - q0_m. Throws
/// DomainError when the previous iterates coincide.
double linearized_spacing(const Vec2& qn, const Vec2& qm, const Vec2& qn0, const Vec2& qm0);

/// Convex quadratic row z^T Q z + l^T q + r <= 0 over the 2 N_t position
/// variables (starting at `offset`) that implies the true SINR constraint
/// a^T Wc a* - Gamma a^T Rs a* >= Gamma sigma^2 / rho.
QuadraticConstraint sinr_surrogate(const Vec2& v, double threshold, double noise_over_rho,
                                   const EigenExpansion& wc, const EigenExpansion& rs,
                                   const MaLayout& q0, int offset, std::string label);

/// Central finite-difference gradient of the slot objective w.r.t. the flat
/// layout vector (step h = fd_step_wavelengths * lambda, halved on non-finite
/// values).
Vec speb_gradient(const SlotProblem& problem, const MaLayout& layout, const CMat& rx,
                  double fd_step_wavelengths = 1e-4);

struct P6Program {
  ConicProgram program;
  int q_offset = 0;
  int spacing_rows = 0;
  int box_rows = 0;
  int cones = 0;
  int sinr_rows = 0;
};

P6Program build_p6(const SlotProblem& problem, const TxCovariance& cov, const MaLayout& q_iter,
                   const MaLayout& q_prev_slot, double max_step, const Vec& grad,
                   double rank_tol = 1e-8);

/// Original (non-linearized) position constraints.
struct LayoutCheck {
  bool region = true;
  bool spacing = true;
  bool speed = true;
  bool sinr = true;

  bool ok() const noexcept { return region && spacing && speed && sinr; }
};

LayoutCheck check_layout(const SlotProblem& problem, const TxCovariance& cov,
                         const MaLayout& layout, const MaLayout& q_prev_slot, double max_step,
                         double sinr_tol_db = 0.0);

struct LineSearchResult {
  double omega = 0.0;
  double objective = 0.0;
  std::vector<double> omegas;
  std::vector<double> objectives;  // +inf where infeasible
};

/// Samples q(omega) = q_prev + omega (q_star - q_prev) on a uniform grid plus
/// a golden-section refinement around the best sample. Infeasible samples
/// are discarded; omega = 0 is always accepted.
template <typename Objective, typename Feasible>
LineSearchResult line_search(const Vec& q_prev, const Vec& q_star, Objective&& f,
                             Feasible&& feasible, int samples = 21, int golden_iterations = 10);

struct PositionResult {
  MaLayout layout;
  std::vector<double> trace;  // objective at the start and after each iteration
  int iterations = 0;
  bool warning = false;
  std::string message;
};

/// Requires q_init to satisfy the original constraints. The objective trace
/// is non-increasing and the returned layout satisfies them as well.
PositionResult optimize_positions(const SlotProblem& problem, const TxCovariance& cov,
                                  const MaLayout& q_init, const MaLayout& q_prev_slot,
                                  double max_step, const PositionSettings& settings = {});

// ---- template implementation ------------------------------------------------

template <typename Objective, typename Feasible>
LineSearchResult line_search(const Vec& q_prev, const Vec& q_star, Objective&& f,
                             Feasible&& feasible, int samples, int golden_iterations) {
  const double inf = std::numeric_limits<double>::infinity();
  LineSearchResult r;
  auto eval = [&](double omega) {
    const Vec q = q_prev + omega * (q_star - q_prev);
    const double v = (omega == 0.0 || feasible(q)) ? f(q) : inf;
    r.omegas.push_back(omega);
    r.objectives.push_back(v);
    return v;
  };
  samples = std::max(samples, 2);
  r.omega = 0.0;
  r.objective = eval(0.0);
  for (int i = 1; i < samples; ++i) {
    const double omega = static_cast<double>(i) / (samples - 1);
    const double v = eval(omega);
    if (v < r.objective) {
      r.omega = omega;
      r.objective = v;
    }
  }
  if (golden_iterations <= 0) return r;
  // Golden-section pass on the bracket around the best grid point.
  const double h = 1.0 / (samples - 1);
  double lo = std::max(0.0, r.omega - h);
  double hi = std::min(1.0, r.omega + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int it = 0; it < golden_iterations; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = eval(x2);
    }
  }
  for (std::size_t i = 0; i < r.omegas.size(); ++i) {
    if (r.objectives[i] < r.objective) {
      r.objective = r.objectives[i];
      r.omega = r.omegas[i];
    }
  }
  return r;
}

}  // namespace maleo
