#include "maleo/beamforming.hpp"
#include "maleo/conic.hpp"
#include "maleo/errors.hpp"
#include "maleo/position_sca.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace maleo;
using maleo::testing::random_psd;
using maleo::testing::small_scenario;

namespace {

double row_value(const QuadraticConstraint& c, const Vec& x) {
  Vec z(static_cast<Eigen::Index>(c.vars.size()));
  for (std::size_t i = 0; i < c.vars.size(); ++i) z[static_cast<Eigen::Index>(i)] = x[c.vars[i]];
  double v = z.dot(c.quad * z) + c.constant;
  for (const auto& t : c.linear) v += t.coeff * x[t.var];
  return v;
}

struct DeskSlot {
  Scenario sc = small_scenario(8, 4, 2, 4);
  BeamformingSolution sol = solve_p4(sc.problems[0], sc.q0);
  const SlotProblem& problem() const { return sc.problems[0]; }
};

const DeskSlot& desk() {
  static const DeskSlot d;
  return d;
}

}  // namespace

TEST(EigExpand, IdentityRankOneAndReconstruction) {
  const EigenExpansion id = eig_expand(CMat::Identity(3, 3));
  EXPECT_EQ(id.rank(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(id.lambda[i], 1.0, 1e-14);

  CVec w(3);
  w << 1.0, cplx(0, 2), cplx(-1, 1);
  EXPECT_EQ(eig_expand(CMat(w * w.adjoint())).rank(), 1);

  std::mt19937_64 rng(2);
  const CMat m = random_psd(5, rng);
  const EigenExpansion e = eig_expand(m, 0.0);
  EXPECT_LE((e.reconstruct() - m).norm(), 1e-8 * m.norm());
  EXPECT_GE(e.amp.minCoeff(), 0.0);
  EXPECT_LE((e.amp.array() * e.phase.array().cos() - e.u.real().array()).abs().maxCoeff(), 1e-12);
}

TEST(CosBounds, ExactAtExpansionPointAndGapIsSquare) {
  CosineLinearization lin{Vec2(30.0, -12.0), Vec2(0.02, 0.05), 0.4};
  const auto [lb, ub] = cos_bounds(lin, lin.dq0);
  EXPECT_NEAR(lb, lin.exact(lin.dq0), 1e-15);
  EXPECT_NEAR(ub, lin.exact(lin.dq0), 1e-15);
  const Vec2 dq(0.01, 0.07);
  const auto [l2, u2] = cos_bounds(lin, dq);
  const double t = lin.v.dot(dq - lin.dq0);
  EXPECT_NEAR(u2 - l2, t * t, 1e-12);
}

TEST(CosBounds, GlobalSandwich) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uv(-60.0, 60.0), uq(-0.3, 0.3), up(-kPi, kPi);
  int violations = 0;
  for (int l = 0; l < 5; ++l) {
    const CosineLinearization lin{Vec2(uv(rng), uv(rng)), Vec2(uq(rng), uq(rng)), up(rng)};
    for (int i = 0; i < 10000; ++i) {
      const Vec2 dq(uq(rng), uq(rng));
      const auto [lb, ub] = cos_bounds(lin, dq);
      const double c = lin.exact(dq);
      if (lb > c + 1e-12 || ub < c - 1e-12) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(LinearizedSpacing, Examples) {
  const Vec2 a(0.1, 0.2), b(-0.05, 0.0);
  EXPECT_NEAR(linearized_spacing(a, b, a, b), (a - b).norm(), 1e-15);
  EXPECT_NEAR(linearized_spacing(2.5 * a, 2.5 * b, a, b), 2.5 * (a - b).norm(), 1e-15);
  EXPECT_THROW(linearized_spacing(a, b, a, a), DomainError);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 qn(u(rng), u(rng)), qm(u(rng), u(rng)), q0n(u(rng), u(rng)), q0m(u(rng), u(rng));
    EXPECT_LE(linearized_spacing(qn, qm, q0n, q0m), (qn - qm).norm() + 1e-15);
  }
}

TEST(BuildP6, CountsForTwoAntennas) {
  const Scenario sc = small_scenario(2, 4, 1, 1);
  const SlotProblem& p = sc.problems[0];
  const BeamformingSolution s = solve_p4(p, sc.q0);
  const P6Program p6 = build_p6(p, s.covariance(), sc.q0, sc.q0, sc.max_step_m, Vec::Ones(4));
  EXPECT_EQ(p6.spacing_rows, 1);
  EXPECT_EQ(p6.box_rows, 2);
  EXPECT_EQ(p6.cones, 2);
  EXPECT_EQ(p6.sinr_rows, static_cast<int>(sc.grid.size()));
}

TEST(BuildP6, SinrRowsTightAtIncumbentAndConvex) {
  const auto& d = desk();
  const P6Program p6 = build_p6(d.problem(), d.sol.covariance(), d.sc.q0, d.sc.q0, d.sc.max_step_m,
                                Vec::Ones(16));
  ASSERT_GT(p6.sinr_rows, 0);
  Vec x = Vec::Zero(p6.program.num_variables());
  x.segment(p6.q_offset, 16) = d.sc.q0.flat();
  for (const auto& c : p6.program.quadratics()) {
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat>(c.quad).eigenvalues().minCoeff(), -1e-9 * c.quad.norm());
    // The incumbent satisfies the true constraint, and the bounds are exact there.
    EXPECT_LE(row_value(c, x), 1e-9 * (1.0 + std::abs(c.constant)));
  }
}

TEST(SinrSurrogate, ConservativeOnSampledLayouts) {
  const auto& d = desk();
  const SlotProblem& p = d.problem();
  const TxCovariance cov = d.sol.covariance();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // The surrogate region is convex, so mixtures of its own solutions (for
  // random objectives) with the incumbent sample its interior.
  std::vector<Vec> vertices{d.sc.q0.flat()};
  P6Program p6;
  for (int v = 0; v < 4; ++v) {
    Vec grad(16);
    for (Eigen::Index k = 0; k < grad.size(); ++k) grad[k] = g(rng);
    p6 = build_p6(p, cov, d.sc.q0, d.sc.q0, d.sc.max_step_m, grad);
    const SolveOutcome o = solve(p6.program);
    ASSERT_TRUE(o.usable());
    vertices.push_back(o.x.segment(p6.q_offset, 16));
  }
  ASSERT_GT(p6.sinr_rows, 0);
  int feasible_samples = 0;
  for (int i = 0; i < 400; ++i) {
    Vec w(static_cast<Eigen::Index>(vertices.size()));
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = u(rng);
    Vec q = Vec::Zero(16);
    for (std::size_t k = 0; k < vertices.size(); ++k) q += w[static_cast<Eigen::Index>(k)] * vertices[k];
    q /= w.sum();
    Vec x = Vec::Zero(p6.program.num_variables());
    x.segment(p6.q_offset, 16) = q;
    bool rows_ok = true;
    for (const auto& c : p6.program.quadratics()) rows_ok = rows_ok && row_value(c, x) <= 0.0;
    if (!rows_ok) continue;
    ++feasible_samples;
    const SinrReport r = evaluate_sinr(p.ces, p.slot, d.sc.q0.with_flat(q), cov, p.waveform);
    for (std::size_t l = 0; l < r.sinr.size(); ++l) {
      EXPECT_GE(r.sinr[l], r.threshold[l] * (1.0 - 1e-8));
    }
  }
  EXPECT_GT(feasible_samples, 200);
}

TEST(SpebGradient, TranslationInvarianceAndRichardson) {
  const auto& d = desk();
  const CMat rx = d.sol.wc + d.sol.rs;
  const SlotProblem& p = d.problem();
  MaLayout shifted = d.sc.q0;
  for (auto& q : shifted.q) q += Vec2(0.01, -0.02);
  const double f0 = scene_objective(p.scene, p.slot, d.sc.q0, rx);
  // The common phase of a translation is absorbed by the unknown amplitude.
  ASSERT_NEAR(scene_objective(p.scene, p.slot, shifted, rx), f0, 1e-8 * f0);

  const Vec g = speb_gradient(p, d.sc.q0, rx);
  const Vec g_half = speb_gradient(p, d.sc.q0, rx, 0.5e-4);
  double sx = 0.0, sy = 0.0;
  for (int n = 0; n < 8; ++n) {
    sx += g[2 * n];
    sy += g[2 * n + 1];
  }
  EXPECT_LE(std::abs(sx), 1e-4 * g.norm());
  EXPECT_LE(std::abs(sy), 1e-4 * g.norm());
  EXPECT_LE((g - g_half).norm(), 1e-3 * g.norm());
  // Directional check.
  const Vec dir = Vec::LinSpaced(16, -1.0, 1.0).normalized();
  const double h = 1e-5;
  const double fd = (scene_objective(p.scene, p.slot, d.sc.q0.with_flat(d.sc.q0.flat() + h * dir), rx) -
                     scene_objective(p.scene, p.slot, d.sc.q0.with_flat(d.sc.q0.flat() - h * dir), rx)) /
                    (2 * h);
  EXPECT_NEAR(g.dot(dir), fd, 1e-3 * std::max(std::abs(fd), 1e-3 * g.norm()));
}

TEST(LineSearch, StationaryDecreasingAndFiltered) {
  const Vec q = Vec::Zero(2);
  auto f = [](const Vec& x) { return 1.0 - x[0]; };
  auto all = [](const Vec&) { return true; };
  const LineSearchResult same = line_search(q, q, f, all);
  EXPECT_DOUBLE_EQ(same.objective, 1.0);

  Vec target(2);
  target << 1.0, 0.0;
  const LineSearchResult dec = line_search(q, target, f, all);
  EXPECT_DOUBLE_EQ(dec.omega, 1.0);

  // Feasible endpoints, infeasible interior: only omega in {0, 1} survive.
  auto ends = [](const Vec& x) { return x[0] <= 1e-12 || x[0] >= 1.0 - 1e-12; };
  auto bowl = [](const Vec& x) { return (x[0] - 0.5) * (x[0] - 0.5); };
  const LineSearchResult fil = line_search(q, target, bowl, ends);
  EXPECT_TRUE(fil.omega == 0.0 || fil.omega == 1.0);
  EXPECT_DOUBLE_EQ(fil.objective, 0.25);
}

TEST(OptimizePositions, CollapsedRegionKeepsLayout) {
  const auto& d = desk();
  MaLayout q = d.sc.q0;
  q.region = {0.0, 0.0, 0.0, 0.0};
  const PositionResult r = optimize_positions(d.problem(), d.sol.covariance(), q, q, d.sc.max_step_m);
  EXPECT_EQ(r.layout.flat(), q.flat());
}

TEST(OptimizePositions, MonotoneAndFeasible) {
  const auto& d = desk();
  PositionSettings s;
  s.max_iterations = 6;
  const PositionResult r = optimize_positions(d.problem(), d.sol.covariance(), d.sc.q0, d.sc.q0,
                                              d.sc.max_step_m, s);
  ASSERT_GE(r.trace.size(), 2u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-12);
  EXPECT_LT(r.trace.back(), r.trace.front());
  const LayoutCheck c = check_layout(d.problem(), d.sol.covariance(), r.layout, d.sc.q0, d.sc.max_step_m);
  EXPECT_TRUE(c.ok());
}
