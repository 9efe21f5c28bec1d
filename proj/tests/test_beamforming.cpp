#include "maleo/ao_driver.hpp"
#include "maleo/beamforming.hpp"
#include "maleo/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace maleo;
using maleo::testing::small_scenario;

namespace {

struct Desk {
  Scenario sc = small_scenario(8, 4, 2, 4);
  const SlotProblem& problem() const { return sc.problems[1]; }
};

const Desk& desk() {
  static const Desk d;
  return d;
}

SlotProblem vacuous(const SlotProblem& p) { return with_threshold({p}, std::nullopt).front(); }

}  // namespace

TEST(BuildP4, SizesForOneAndTwoSites) {
  for (int k : {1, 2}) {
    const Scenario sc = small_scenario(4, 4, k, 1);
    const P4Program p4 = build_p4(sc.problems[0], sc.q0);
    EXPECT_EQ(p4.program.lmi_count(7), k);
    EXPECT_EQ(p4.program.num_variables(), 2 * 4 * 4 + 9 * k);
    EXPECT_EQ(p4.sinr_rows, static_cast<int>(sc.grid.size()));
  }
}

TEST(BuildP4, NoSinrRowsWhenThresholdVacuous) {
  const P4Program p4 = build_p4(vacuous(desk().problem()), desk().sc.q0);
  EXPECT_EQ(p4.sinr_rows, 0);
}

TEST(BuildP4, RejectsBadDimensions) {
  EXPECT_THROW(build_p4(desk().problem(), desk().sc.q0, CMat::Identity(3, 3)), DomainError);
}

TEST(SolveP4, SolutionAuditAndObjectiveOracle) {
  const SlotProblem& p = desk().problem();
  const BeamformingSolution s = solve_p4(p, desk().sc.q0);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  const CMat rx = s.wc + s.rs;
  EXPECT_LE(rx.trace().real(), p.p_max * (1.0 + 1e-6));
  const auto bundles = evaluate_scene(p.scene, p.slot, desk().sc.q0, rx);
  const double oracle = sum_speb(bundles);
  EXPECT_NEAR(s.objective, oracle, 1e-4 * oracle);
  for (std::size_t k = 0; k < bundles.size(); ++k) {
    EXPECT_GE(s.z[k].trace(), bundles[k].speb * (1.0 - 1e-6));
  }
  TxCovariance cov = s.covariance();
  const SinrReport r = evaluate_sinr(p.ces, p.slot, desk().sc.q0, cov, p.waveform, 1e-6);
  EXPECT_TRUE(r.all_satisfied());
}

TEST(SolveP4, FullPowerAndHomogeneityWithoutSinr) {
  SlotProblem p = vacuous(desk().problem());
  const BeamformingSolution a = solve_p4(p, desk().sc.q0);
  EXPECT_NEAR((a.wc + a.rs).trace().real(), p.p_max, 1e-5 * p.p_max);
  p.p_max *= 2.0;
  const BeamformingSolution b = solve_p4(p, desk().sc.q0);
  EXPECT_NEAR(b.objective, a.objective / 2.0, 1e-4 * a.objective);
}

TEST(SolveP4, MonotoneInPower) {
  SlotProblem p = desk().problem();
  double last = std::numeric_limits<double>::infinity();
  for (double dbw : {15.0, 20.0, 25.0}) {
    p.p_max = dbw_to_watts(dbw);
    const double f = solve_p4(p, desk().sc.q0).objective;
    EXPECT_LE(f, last * (1.0 + 1e-6));
    last = f;
  }
}

TEST(SolveP4, UnreachableThresholdIsInfeasible) {
  // Even with all power on one CE and no sensing signal, SINR stays below
  // rho P N_t / sigma^2; ask for 3 dB more than the best such bound.
  const SlotProblem& base = desk().problem();
  double best = 0.0;
  for (const auto& ce : base.ces) {
    const CommLink link = comm_link(ce, base.slot, desk().sc.q0, base.waveform);
    best = std::max(best, link.rho * base.p_max * link.a.squaredNorm() / ce.noise_power);
  }
  const SlotProblem p = with_threshold({base}, linear_to_db(best) + 3.0).front();
  EXPECT_THROW(solve_p4(p, desk().sc.q0), InfeasibleError);
}

TEST(RecoverRank1, AlreadyRankOne) {
  const SlotProblem& p = desk().problem();
  BeamformingSolution s = solve_p4(p, desk().sc.q0);
  Eigen::SelfAdjointEigenSolver<CMat> es(s.wc);
  const CVec u = es.eigenvectors().col(s.wc.rows() - 1);
  s.wc = es.eigenvalues()[s.wc.rows() - 1] * u * u.adjoint();
  const RecoveryResult r = recover_rank1(s, p, desk().sc.q0, RecoverySettings{});
  EXPECT_TRUE(r.already_rank_one);
  ASSERT_TRUE(r.solution.w.has_value());
  const CVec& w = *r.solution.w;
  EXPECT_LE((w * w.adjoint() - s.wc).norm(), 1e-8 * s.wc.norm());
}

TEST(RecoverRank1, FeasibleAndAboveRelaxation) {
  const SlotProblem& p = desk().problem();
  const BeamformingSolution s = solve_p4(p, desk().sc.q0);
  RecoverySettings rs;
  rs.samples = 30;
  const RecoveryResult r = recover_rank1(s, p, desk().sc.q0, rs);
  const TxCovariance cov = r.solution.covariance();
  const SlotAudit a = audit_slot(p, cov, desk().sc.q0, desk().sc.q0, 1.0);
  EXPECT_TRUE(a.ok());
  const double rec = scene_objective(p.scene, p.slot, desk().sc.q0, cov.rx());
  EXPECT_GE(rec, s.objective * (1.0 - 1e-6));
}

TEST(RandomBeamforming, PowerAndDeterminism) {
  const TxCovariance a = random_beamforming(8, 100.0, 42);
  const TxCovariance b = random_beamforming(8, 100.0, 42);
  EXPECT_NEAR(a.rx().trace().real(), 100.0, 1e-9);
  EXPECT_EQ(a.wc, b.wc);
  EXPECT_EQ(a.rs, b.rs);
  ASSERT_TRUE(a.w.has_value());
  EXPECT_NE(random_beamforming(8, 100.0, 43).wc, a.wc);
}

TEST(RandomBeamforming, NeverBeatsOptimizedCovariance) {
  const SlotProblem p = vacuous(desk().problem());
  const double opt = solve_p4(p, desk().sc.q0).objective;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TxCovariance r = random_beamforming(8, p.p_max, seed);
    EXPECT_GE(scene_objective(p.scene, p.slot, desk().sc.q0, r.rx()), opt * (1.0 - 1e-6));
  }
}
