#include <benchmark/benchmark.h>

#include "gpslab/gps.hpp"
#include "gpslab/homodyne.hpp"
#include "gpslab/phase_space.hpp"
#include "gpslab/tomography.hpp"

using namespace gpslab;

static void BM_BeamSplitter(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const TwoModeState in = TwoModeState::product(squeezed_vacuum(0.37, dim).state, squeezed_vacuum(-0.36, dim).state);
  for (auto _ : state) benchmark::DoNotOptimize(beam_splitter(in, 0.6));
}
BENCHMARK(BM_BeamSplitter)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_HeraldIdeal(benchmark::State& state) {
  const GpsConfig cfg = reference_config(0.4);
  for (auto _ : state) benchmark::DoNotOptimize(herald_ideal(cfg));
}
BENCHMARK(BM_HeraldIdeal)->Unit(benchmark::kMillisecond);

static void BM_HeraldRealistic(benchmark::State& state) {
  const GpsConfig cfg = reference_config(0.4);
  for (auto _ : state) benchmark::DoNotOptimize(herald_realistic(cfg, 3));
}
BENCHMARK(BM_HeraldRealistic)->Unit(benchmark::kMillisecond);

static void BM_ExtractS0(benchmark::State& state) {
  const DensityOperator rho = herald_ideal(reference_config(0.4)).state;
  for (auto _ : state) benchmark::DoNotOptimize(extract_s0(rho, 3));
}
BENCHMARK(BM_ExtractS0)->Unit(benchmark::kMillisecond);

static void BM_WignerGrid(benchmark::State& state) {
  const DensityOperator rho = DensityOperator::pure(analytic_target(3, 0.5, 40));
  const int n = static_cast<int>(state.range(0));
  const GridSpec grid{{-7, 7, n}, {-7, 7, n}};
  for (auto _ : state) benchmark::DoNotOptimize(wigner(rho, grid));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_WignerGrid)->Arg(101)->Arg(281)->Unit(benchmark::kMillisecond);

static void BM_Sample(benchmark::State& state) {
  const DensityOperator rho = DensityOperator::pure(analytic_target(3, 0.5, 40));
  const auto phases = reference_phases_deg();
  for (auto _ : state) benchmark::DoNotOptimize(sample(rho, phases, kReferenceSamplesPerPhase, 0.8, 1));
}
BENCHMARK(BM_Sample)->Unit(benchmark::kMillisecond);

static void BM_MleIteration(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto phases = reference_phases_deg();
  const std::vector<double> edges = uniform_edges(-kDefaultBinRange, kDefaultBinRange, kDefaultBins);
  const HomodyneDataset data = sample(DensityOperator::pure(analytic_target(3, 0.5, 40)), phases, 20000, 0.8, 3);
  const PovmSet povm = build_povm(phases, edges, dim);
  const Eigen::MatrixXd freq = frequencies(bin(data, edges));
  DensityOperator rho = DensityOperator::maximally_mixed(dim);
  for (auto _ : state) rho = rrhor_step(rho, povm, freq);
}
BENCHMARK(BM_MleIteration)->Arg(15)->Arg(30)->Unit(benchmark::kMicrosecond);

static void BM_BuildPovm(benchmark::State& state) {
  const auto phases = reference_phases_deg();
  const std::vector<double> edges = uniform_edges(-kDefaultBinRange, kDefaultBinRange, kDefaultBins);
  for (auto _ : state) benchmark::DoNotOptimize(build_povm(phases, edges, 15, 0.8));
}
BENCHMARK(BM_BuildPovm)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
