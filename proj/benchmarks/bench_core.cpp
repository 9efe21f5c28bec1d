// Micro benchmarks for the hot paths of one AO iteration.
#include "maleo/ao_driver.hpp"
#include "maleo/beamforming.hpp"
#include "maleo/metrics.hpp"
#include "maleo/position_sca.hpp"
#include "maleo/scenario.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace maleo;

const Scenario& desk() {
  static const Scenario sc = build_scenario(desk_defaults());
  return sc;
}

const BeamformingSolution& desk_solution() {
  static const BeamformingSolution s = solve_p4(desk().problems[1], desk().q0);
  return s;
}

void BM_MaSteering(benchmark::State& state) {
  const SlotProblem& p = desk().problems[0];
  const Vec3 target = p.ces.front().position;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ma_steering(target, p.slot, desk().q0, p.waveform.wavelength_m));
  }
}
BENCHMARK(BM_MaSteering);

void BM_SceneObjective(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  const CMat rx = desk_solution().wc + desk_solution().rs;
  for (auto _ : state) benchmark::DoNotOptimize(scene_objective(p.scene, p.slot, desk().q0, rx));
}
BENCHMARK(BM_SceneObjective);

void BM_SpebGradient(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  const CMat rx = desk_solution().wc + desk_solution().rs;
  for (auto _ : state) benchmark::DoNotOptimize(speb_gradient(p, desk().q0, rx));
}
BENCHMARK(BM_SpebGradient);

void BM_BuildP4(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  for (auto _ : state) benchmark::DoNotOptimize(build_p4(p, desk().q0));
}
BENCHMARK(BM_BuildP4);

void BM_SolveP4(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  for (auto _ : state) benchmark::DoNotOptimize(solve_p4(p, desk().q0));
}
BENCHMARK(BM_SolveP4)->Unit(benchmark::kMillisecond);

void BM_OptimizePositions(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  PositionSettings s;
  s.max_iterations = static_cast<int>(state.range(0));
  const TxCovariance cov = desk_solution().covariance();
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_positions(p, cov, desk().q0, desk().q0, desk().max_step_m, s));
  }
}
BENCHMARK(BM_OptimizePositions)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_RecoverRank1(benchmark::State& state) {
  const SlotProblem& p = desk().problems[1];
  RecoverySettings rs;
  rs.samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(recover_rank1(desk_solution(), p, desk().q0, rs));
}
BENCHMARK(BM_RecoverRank1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
