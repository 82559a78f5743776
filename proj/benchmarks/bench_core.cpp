#include <benchmark/benchmark.h>

#include "metasrl/cmdp.hpp"
#include "metasrl/crpo.hpp"
#include "metasrl/dice.hpp"
#include "metasrl/oracle.hpp"
#include "metasrl/projection.hpp"
#include "metasrl/rng.hpp"
#include "metasrl/sampler.hpp"
#include "oracles.hpp"

using namespace metasrl;

namespace {

TabularCmdp instance(std::size_t ns, std::size_t na) {
  Rng rng(derive_seed({17, ns, na}));
  return oracle::random_cmdp(rng, ns, na, 1, 0.9);
}

void BM_OptimalLp(benchmark::State& state) {
  const auto ns = static_cast<std::size_t>(state.range(0));
  const TabularCmdp m = instance(ns, 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_optimal_lp(m));
}
BENCHMARK(BM_OptimalLp)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

void BM_PolicyEvaluation(benchmark::State& state) {
  const auto ns = static_cast<std::size_t>(state.range(0));
  const TabularCmdp m = instance(ns, 4);
  const PolicyTable pi = PolicyTable::Constant(static_cast<Eigen::Index>(ns), 4, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(expected_objectives(m, pi));
}
BENCHMARK(BM_PolicyEvaluation)->Arg(5)->Arg(20)->Arg(80);

void BM_Crpo(benchmark::State& state) {
  const TabularCmdp m = instance(10, 4);
  CrpoConfig cfg;
  cfg.steps = 50;
  for (auto _ : state) benchmark::DoNotOptimize(run_crpo(m, SoftmaxPolicy::uniform(10, 4), cfg));
}
BENCHMARK(BM_Crpo);

void BM_DualDice(benchmark::State& state) {
  const TabularCmdp m = instance(10, 4);
  const PolicyTable pi = PolicyTable::Constant(10, 4, 0.25);
  TrajectoryDataset data(10, 4, 1);
  Rng rng(3);
  rollout_episodes(CmdpSampler(m), pi, static_cast<std::size_t>(state.range(0)), 50, 0, rng, data);
  DiceConfig cfg;
  cfg.solver = state.range(1) ? DiceSolver::Sgd : DiceSolver::DirectSolve;
  for (auto _ : state) benchmark::DoNotOptimize(dualdice_fit(data, pi, 0.9, cfg));
}
BENCHMARK(BM_DualDice)->Args({20, 0})->Args({200, 0})->Args({20, 1});

void BM_ShrinkageProjection(benchmark::State& state) {
  Rng rng(5);
  const auto na = static_cast<Eigen::Index>(state.range(0));
  Matrix table(64, na);
  for (Eigen::Index i = 0; i < table.size(); ++i) table(i) = rng.uniform(-1.0, 2.0);
  const double rho = 0.5 / static_cast<double>(na);
  for (auto _ : state) benchmark::DoNotOptimize(project_rows_shrinkage_simplex(table, rho));
}
BENCHMARK(BM_ShrinkageProjection)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
