#include <benchmark/benchmark.h>

#include <random>

#include "crbeam/evaluate.hpp"
#include "crbeam/extract.hpp"
#include "crbeam/formulations.hpp"
#include "crbeam/hermitian.hpp"

using namespace crbeam;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return 0.5 * (g + g.transpose().eval());
}

ScenarioConfig golden_scenario() {
  ScenarioConfig s;
  s.n_antennas = 8;
  s.noise_power = 0.01;
  for (double theta : {20.0, 35.0, 50.0}) {
    s.su_channels.push_back(ula_steering(theta, 8));
    s.su_uncertainty.push_back(UncertaintyBall::from_matrix_radius(0.05, s.su_channels.back()));
    s.sinr_thresholds.push_back(10.0);
  }
  for (double phi : {80.0, 85.0}) {
    s.pu_channels.push_back(ula_steering(phi, 8));
    s.pu_uncertainty.push_back(UncertaintyBall::from_matrix_radius(0.05, s.pu_channels.back()));
    s.ip_thresholds.push_back(0.01);
  }
  return s;
}

void BM_JacobiEig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd s = random_symmetric(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigensym(s));
}
BENCHMARK(BM_JacobiEig)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_PsdProject(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  const Eigen::VectorXd v = svec(random_symmetric(n, rng));
  Eigen::VectorXd w = v;
  for (auto _ : state) {
    w = v;
    psd_project(w);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_PsdProject)->Arg(8)->Arg(16);

void BM_BuildProgram(benchmark::State& state) {
  const ScenarioConfig s = golden_scenario();
  const FormulationKind kind = static_cast<FormulationKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_formulation(kind, s));
}
BENCHMARK(BM_BuildProgram)->Arg(0)->Arg(1)->Arg(2);

void BM_SolveGolden(benchmark::State& state) {
  const ScenarioConfig s = golden_scenario();
  const FormulationKind kind = static_cast<FormulationKind>(state.range(0));
  const ConicProgram p = build_formulation(kind, s);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_SolveGolden)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_MonteCarlo(benchmark::State& state) {
  const ScenarioConfig s = golden_scenario();
  const PrecoderSolution sol = extract_solution(s, FormulationKind::Excs, solve(build_excs(s)));
  const long n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(s, sol, n, 7));
}
BENCHMARK(BM_MonteCarlo)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
