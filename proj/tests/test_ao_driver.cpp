#include "maleo/ao_driver.hpp"
#include "maleo/experiments.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace maleo;
using maleo::testing::small_config;
using maleo::testing::small_scenario;

namespace {

MaLayout translated(const MaLayout& l, const Vec2& t) {
  MaLayout out = l;
  for (auto& q : out.q) q += t;
  return out;
}

AoSettings quick_settings(const Scenario& sc) {
  AoSettings s = sc.ao_settings();
  s.recovery.samples = 20;
  return s;
}

}  // namespace

TEST(InitPositions, ReachesTargetOrStepsExactly) {
  const Scenario sc = small_scenario(8, 4, 2, 4);
  const MaLayout& q0 = sc.q0;
  EXPECT_EQ(init_positions(q0, q0, 0.01).flat(), q0.flat());

  const MaLayout near = translated(q0, Vec2(0.001, 0.0));
  EXPECT_LE((init_positions(near, q0, 0.1).flat() - q0.flat()).norm(), 1e-15);

  const MaLayout far = translated(q0, Vec2(0.1, 0.0));
  const MaLayout step = init_positions(far, q0, 0.01);
  EXPECT_NEAR((step.flat() - far.flat()).norm(), 0.01, 1e-12);
  EXPECT_LE(step.max_displacement(far), 0.01);
  EXPECT_GE(step.min_spacing(), q0.d_min * (1.0 - 1e-9));
}

TEST(SolveSlot, MonotoneTraceAndAudit) {
  const Scenario sc = small_scenario(4, 4, 1, 2);
  const SlotResult r = solve_slot(sc.problems[0], sc.q0, sc.q0, sc.max_step_m, quick_settings(sc));
  ASSERT_TRUE(r.ok);
  ASSERT_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-9 * r.trace[i - 1]);
  EXPECT_GE(r.trace.back(), 0.0);
  EXPECT_TRUE(r.audit.ok());
  EXPECT_GE(r.objective, r.relaxed_objective * (1.0 - 1e-6));
}

TEST(SolveSlot, FrozenAntennasMatchFixedArray) {
  const Scenario sc = small_scenario(4, 4, 1, 1);
  AoSettings moving = quick_settings(sc);
  const SlotResult frozen = solve_slot(sc.problems[0], sc.q0, sc.q0, 0.0, moving);
  AoSettings fixed = moving;
  fixed.move_antennas = false;
  const SlotResult bench = solve_slot(sc.problems[0], sc.q0, sc.q0, 0.0, fixed);
  EXPECT_EQ(frozen.layout.flat(), sc.q0.flat());
  EXPECT_NEAR(frozen.relaxed_objective, bench.relaxed_objective, 1e-9 * bench.relaxed_objective);
  EXPECT_NEAR(frozen.objective, bench.objective, 1e-9 * bench.objective);
}

TEST(SolveSlot, DoublingPowerHalvesObjectiveWithoutSinr) {
  const Scenario sc = small_scenario(4, 4, 1, 1);
  SlotProblem p = with_threshold(sc.problems, std::nullopt).front();
  const SlotResult a = solve_slot(p, sc.q0, sc.q0, sc.max_step_m, quick_settings(sc));
  p.p_max *= 2.0;
  const SlotResult b = solve_slot(p, sc.q0, sc.q0, sc.max_step_m, quick_settings(sc));
  EXPECT_NEAR(b.objective / a.objective, 0.5, 0.01);
}

TEST(RunHorizon, SingleSlotEqualsSolveSlot) {
  const Scenario sc = small_scenario(4, 4, 1, 1);
  const AoSettings s = quick_settings(sc);
  const HorizonResult h = run_horizon(sc.problems, sc.q0, sc.max_step_m, s);
  const SlotResult r = solve_slot(sc.problems[0], sc.q0, sc.q0, sc.max_step_m, s);
  ASSERT_EQ(h.slots.size(), 1u);
  EXPECT_EQ(h.slots[0].objective, r.objective);
  EXPECT_EQ(h.slots[0].layout.flat(), r.layout.flat());
}

TEST(RunHorizon, SpeedChainAndSymmetricProfile) {
  // Desk sites sit mirror-symmetric about the ground track's closest approach.
  ScenarioConfig c = desk_defaults();
  c.array.n_tx = 4;
  c.array.n_rx = 4;
  const Scenario sc = build_scenario(c);
  const HorizonResult h = run_horizon(sc.problems, sc.q0, sc.max_step_m, quick_settings(sc));
  ASSERT_EQ(h.failures(), 0);
  MaLayout prev = sc.q0;
  for (const auto& r : h.slots) {
    EXPECT_LE(r.layout.max_displacement(prev), sc.max_step_m * (1.0 + 1e-12));
    EXPECT_TRUE(r.audit.ok());
    prev = r.layout;
  }
  // Slot m mirrors slot M + 1 - m. The moving chain is path dependent, so
  // compare the fixed array, where each slot stands alone.
  AoSettings fixed = quick_settings(sc);
  fixed.move_antennas = false;
  fixed.recover = false;
  const HorizonResult f = run_horizon(sc.problems, sc.q0, sc.max_step_m, fixed);
  EXPECT_NEAR(f.slots[0].objective / f.slots[3].objective, 1.0, 1e-3);
  EXPECT_NEAR(f.slots[1].objective / f.slots[2].objective, 1.0, 1e-3);
}

TEST(Benchmarks, OrderingOnSmallInstance) {
  ScenarioConfig c = small_config(4, 4, 1, 2);
  c.experiment.random_trials = 2;
  c.solver.randomization_samples = 20;
  const Scenario sc = build_scenario(c);
  const double thr = *c.power.sinr_threshold_db;
  const double proposed = run_method(sc, {Method::Proposed, c.power.p_max_dbw, thr}).mean_objective();
  const double upa = run_method(sc, {Method::FixedUpa, c.power.p_max_dbw, thr}).mean_objective();
  const double rnd = run_method(sc, {Method::Random, c.power.p_max_dbw, thr}).mean_objective();
  EXPECT_LE(proposed, upa * (1.0 + 1e-6));
  EXPECT_LE(upa, rnd * (1.0 + 1e-6));
}
