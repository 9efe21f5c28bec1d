#include "maleo/position_sca.hpp"

#include "maleo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maleo {

namespace {

constexpr double kSpacingRelTol = 1e-9;

double objective_or_inf(const SlotProblem& problem, const MaLayout& layout, const CMat& rx) {
  try {
    const double v = scene_objective(problem.scene, problem.slot, layout, rx);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const SingularFimError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::string indexed(const char* base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

}  // namespace

CMat EigenExpansion::reconstruct() const {
  if (u.cols() == 0) return CMat::Zero(u.rows(), u.rows());
  return u * lambda.asDiagonal() * u.adjoint();
}

EigenExpansion eig_expand(const CMat& m, double rank_tol) {
  require_psd(m, "eig_expand");
  const Eigen::Index n = m.rows();
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const double top = std::max(0.0, es.eigenvalues()[n - 1]);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (top > 0.0 && es.eigenvalues()[i] >= rank_tol * top) keep.push_back(i);
  }
  EigenExpansion e;
  const auto r = static_cast<Eigen::Index>(keep.size());
  e.lambda.resize(r);
  e.u.resize(n, r);
  e.amp.resize(n, r);
  e.phase.resize(n, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index i = keep[static_cast<std::size_t>(c)];
    e.lambda[c] = es.eigenvalues()[i];
    e.u.col(c) = es.eigenvectors().col(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      e.amp(k, c) = std::abs(e.u(k, c));
      e.phase(k, c) = std::arg(e.u(k, c));
    }
  }
  return e;
}

std::pair<double, double> cos_bounds(const CosineLinearization& lin, const Vec2& dq) {
  const double theta0 = lin.v.dot(lin.dq0) + lin.phase;
  const double t = lin.v.dot(dq - lin.dq0);
  const double base = std::cos(theta0) - std::sin(theta0) * t;
  return {base - 0.5 * t * t, base + 0.5 * t * t};
}

double linearized_spacing(const Vec2& qn, const Vec2& qm, const Vec2& qn0, const Vec2& qm0) {
  const Vec2 d0 = qn0 - qm0;
  const double len = d0.norm();
  if (!(len > 0.0)) throw DomainError("linearized_spacing: previous iterates coincide");
  return d0.dot(qn - qm) / len;
}

QuadraticConstraint sinr_surrogate(const Vec2& v, double threshold, double noise_over_rho,
                                   const EigenExpansion& wc, const EigenExpansion& rs,
                                   const MaLayout& q0, int offset, std::string label) {
  const int n = q0.size();
  const int dim = 2 * n;
  // Per pair (i < j): g_ij(s) = gamma + beta s - kappa s^2 / 2, s = e^T q - c.
  Mat quad = Mat::Zero(dim, dim);
  Vec lin = Vec::Zero(dim);
  double constant = 0.0;

  // Diagonal terms are position-independent: Tr(Wc) - Gamma Tr(Rs).
  double fixed = wc.lambda.sum() - threshold * rs.lambda.sum();

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 dq0 = q0.q[static_cast<std::size_t>(i)] - q0.q[static_cast<std::size_t>(j)];
      const double vd = v.dot(dq0);
      double gamma = 0.0, beta = 0.0, kappa = 0.0;
      for (int r = 0; r < wc.rank(); ++r) {
        const double w = 2.0 * wc.lambda[r] * wc.amp(i, r) * wc.amp(j, r);
        const double th = vd + wc.phase(i, r) - wc.phase(j, r);
        gamma += w * std::cos(th);
        beta -= w * std::sin(th);
        kappa += w;
      }
      for (int r = 0; r < rs.rank(); ++r) {
        const double w = threshold * 2.0 * rs.lambda[r] * rs.amp(i, r) * rs.amp(j, r);
        const double th = vd + rs.phase(i, r) - rs.phase(j, r);
        gamma -= w * std::cos(th);
        beta += w * std::sin(th);
        kappa += w;
      }
      if (gamma == 0.0 && beta == 0.0 && kappa == 0.0) continue;
      // e has +v at antenna i and -v at antenna j; c = v^T dq0.
      Vec e = Vec::Zero(dim);
      e.segment<2>(2 * i) = v;
      e.segment<2>(2 * j) = -v;
      // -(gamma + beta (e^T q - c) - kappa/2 (e^T q - c)^2)
      quad += 0.5 * kappa * e * e.transpose();
      lin += -kappa * vd * e - beta * e;
      constant += 0.5 * kappa * vd * vd + beta * vd - gamma;
    }
  }
  constant += threshold * noise_over_rho - fixed;

  QuadraticConstraint c;
  c.vars.resize(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) c.vars[static_cast<std::size_t>(k)] = offset + k;
  c.quad = 0.5 * (quad + quad.transpose());
  for (int k = 0; k < dim; ++k) {
    if (lin[k] != 0.0) c.linear.push_back({offset + k, lin[k]});
  }
  c.constant = constant;
  c.label = std::move(label);
  return c;
}

Vec speb_gradient(const SlotProblem& problem, const MaLayout& layout, const CMat& rx,
                  double fd_step_wavelengths) {
  const Vec q = layout.flat();
  Vec g(q.size());
  const double h0 = fd_step_wavelengths * problem.waveform.wavelength_m;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double h = h0;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt, h *= 0.5) {
      Vec qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double fp = objective_or_inf(problem, layout.with_flat(qp), rx);
      const double fm = objective_or_inf(problem, layout.with_flat(qm), rx);
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[i] = (fp - fm) / (2.0 * h);
        ok = true;
      }
    }
    if (!ok) throw DomainError("speb_gradient: objective not finite near the layout");
  }
  return g;
}

P6Program build_p6(const SlotProblem& problem, const TxCovariance& cov, const MaLayout& q_iter,
                   const MaLayout& q_prev_slot, double max_step, const Vec& grad,
                   double rank_tol) {
  const int n = q_iter.size();
  if (q_prev_slot.size() != n || grad.size() != 2 * n) {
    throw DomainError("build_p6: inconsistent dimensions");
  }
  P6Program out;
  ConicProgram& prog = out.program;
  const int off = prog.add_block("q", BlockKind::Vector, 2 * n);
  out.q_offset = off;

  LinearExpr obj;
  for (int k = 0; k < 2 * n; ++k) obj.push_back({off + k, grad[k]});
  prog.add_objective(obj);
  prog.set_objective_offset(-grad.dot(q_iter.flat()));

  const Region2& box = q_iter.region;
  for (int i = 0; i < n; ++i) {
    const auto label = indexed("region", static_cast<std::size_t>(i));
    const int x = off + 2 * i, y = x + 1;
    prog.add_inequality({{x, 1.0}}, box.x_max, label);
    prog.add_inequality({{x, -1.0}}, -box.x_min, label);
    prog.add_inequality({{y, 1.0}}, box.y_max, label);
    prog.add_inequality({{y, -1.0}}, -box.y_min, label);
    ++out.box_rows;

    SocConstraint cone;
    cone.rows = {{{x, 1.0}}, {{y, 1.0}}};
    cone.offsets = -q_prev_slot.q[static_cast<std::size_t>(i)];
    cone.bound_offset = max_step;
    cone.label = indexed("speed", static_cast<std::size_t>(i));
    prog.add_soc(std::move(cone));
    ++out.cones;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 d0 = q_iter.q[static_cast<std::size_t>(i)] - q_iter.q[static_cast<std::size_t>(j)];
      const double len = d0.norm();
      if (!(len > 0.0)) throw DomainError("build_p6: coincident antennas cannot be linearized");
      const Vec2 u = d0 / len;
      // d_hat = u^T (q_i - q_j) >= d_min
      prog.add_inequality({{off + 2 * i, -u.x()}, {off + 2 * i + 1, -u.y()},
                           {off + 2 * j, u.x()}, {off + 2 * j + 1, u.y()}},
                          -q_iter.d_min,
                          "spacing[" + std::to_string(i) + "," + std::to_string(j) + "]");
      ++out.spacing_rows;
    }
  }

  if (problem.has_sinr_rows()) {
    const EigenExpansion wc = eig_expand(cov.wc, rank_tol);
    const EigenExpansion rs = eig_expand(cov.rs, rank_tol);
    for (std::size_t l = 0; l < problem.ces.size(); ++l) {
      const CommTarget& ce = problem.ces[l];
      if (ce.threshold <= 0.0) continue;
      const Vec2 v = ma_phase_direction(ce.position, problem.slot, problem.waveform.wavelength_m,
                                        problem.waveform.steering);
      const double rho = path_loss((ce.position - problem.slot.p_leo).norm(), problem.waveform);
      prog.add_quadratic(
          sinr_surrogate(v, ce.threshold, ce.noise_power / rho, wc, rs, q_iter, off, indexed("sinr", l)));
      ++out.sinr_rows;
    }
  }
  return out;
}

LayoutCheck check_layout(const SlotProblem& problem, const TxCovariance& cov,
                         const MaLayout& layout, const MaLayout& q_prev_slot, double max_step,
                         double sinr_tol_db) {
  LayoutCheck c;
  const double scale = std::max({1.0, std::abs(layout.region.x_max), std::abs(layout.region.x_min),
                                 std::abs(layout.region.y_max), std::abs(layout.region.y_min)});
  c.region = layout.in_region(1e-12 * scale);
  c.spacing = layout.size() < 2 || layout.min_spacing() >= layout.d_min * (1.0 - kSpacingRelTol);
  c.speed = layout.max_displacement(q_prev_slot) <= max_step * (1.0 + 1e-12) + 1e-15;
  if (problem.has_sinr_rows()) {
    c.sinr = evaluate_sinr(problem.ces, problem.slot, layout, cov, problem.waveform, sinr_tol_db)
                 .all_satisfied();
  }
  return c;
}

PositionResult optimize_positions(const SlotProblem& problem, const TxCovariance& cov,
                                  const MaLayout& q_init, const MaLayout& q_prev_slot,
                                  double max_step, const PositionSettings& settings) {
  PositionResult res;
  res.layout = q_init;
  const CMat rx = cov.rx();
  double f = objective_or_inf(problem, q_init, rx);
  res.trace.push_back(f);
  if (!std::isfinite(f)) {
    res.warning = true;
    res.message = "objective not finite at the initial layout";
    return res;
  }
  const Region2& box = q_init.region;
  if (!(max_step > 0.0) || !(box.width() > 0.0) || !(box.height() > 0.0)) {
    res.message = "antennas cannot move";
    return res;
  }

  auto feasible = [&](const Vec& q) {
    return check_layout(problem, cov, q_init.with_flat(q), q_prev_slot, max_step).ok();
  };
  auto objective = [&](const Vec& q) { return objective_or_inf(problem, q_init.with_flat(q), rx); };

  for (int it = 0; it < settings.max_iterations; ++it) {
    const Vec grad = speb_gradient(problem, res.layout, rx, settings.fd_step_wavelengths);
    if (grad.norm() == 0.0) break;
    // Unit direction: the minimizer is unchanged, and the solver's absolute
    // tolerances no longer depend on the SPEB scale (power, noise).
    P6Program p6 = build_p6(problem, cov, res.layout, q_prev_slot, max_step, grad / grad.norm(),
                            settings.rank_tol);
    Vec start = Vec::Zero(p6.program.num_variables());
    start.segment(p6.q_offset, 2 * q_init.size()) = res.layout.flat();
    const SolveOutcome o = solve(p6.program, settings.solver, start);
    if (!o.usable()) {
      res.warning = true;
      res.message = "position subproblem " + std::string(to_string(o.status)) +
                    (o.binding_constraint.empty() ? "" : " at " + o.binding_constraint);
      break;
    }
    const Vec q_star = o.x.segment(p6.q_offset, 2 * q_init.size());
    const LineSearchResult ls = line_search(res.layout.flat(), q_star, objective, feasible,
                                            settings.omega_samples, settings.golden_iterations);
    ++res.iterations;
    const double f_new = std::min(ls.objective, f);
    if (ls.omega > 0.0 && ls.objective < f) {
      res.layout = q_init.with_flat(res.layout.flat() + ls.omega * (q_star - res.layout.flat()));
    }
    res.trace.push_back(f_new);
    const double decrement = (f - f_new) / f;
    f = f_new;
    if (decrement < settings.rel_tol) break;
  }
  return res;
}

}  // namespace maleo
