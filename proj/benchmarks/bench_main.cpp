#include <benchmark/benchmark.h>

#include "qndcount/analysis.hpp"
#include "qndcount/dense_oracle.hpp"
#include "qndcount/dynamics.hpp"
#include "qndcount/protocol.hpp"
#include "qndcount/symbasis.hpp"

using namespace qndcount;

static void BuildBlock(benchmark::State& state) {
  const int atoms = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_block(atoms / 2, atoms, 0, 1.0, 0.1));
}
BENCHMARK(BuildBlock)->Arg(4)->Arg(10)->Arg(40);

// One expm per j block, so the cost grows slowly with N.
static void BlockEvolve(benchmark::State& state) {
  const int atoms = static_cast<int>(state.range(0));
  const BlockDensity rho = fock_density(2, atoms);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_density(rho, 1.3, 1.0, 0.1));
}
BENCHMARK(BlockEvolve)->Arg(4)->Arg(10)->Arg(40);

static void DenseEvolve(benchmark::State& state) {
  const int atoms = static_cast<int>(state.range(0));
  const DenseState rho = dense_from_ket(build_symmetric_ket(1, atoms), atoms);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_dense(rho, 1.3, 1.0, 0.1));
}
BENCHMARK(DenseEvolve)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void ExpectedFidelity(benchmark::State& state) {
  const FidelityProblem toy = two_candidate_toy();
  const std::vector<double> taus(static_cast<std::size_t>(state.range(0)), 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(expected_fidelity(taus, toy));
}
BENCHMARK(ExpectedFidelity)->DenseRange(2, 12, 2);

static void GlobalSchedule(benchmark::State& state) {
  const FidelityProblem toy = two_candidate_toy();
  TauGrid grid;
  grid.points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_schedule_global(2, toy, grid));
}
BENCHMARK(GlobalSchedule)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void Trajectory(benchmark::State& state) {
  ProtocolParams p;
  p.seed = 5;
  std::uint64_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(InitialCondition::fock(2), p, 1, index++));
}
BENCHMARK(Trajectory)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
