// Microbenchmarks for the solver and identification hot paths. Sizes track
// the intended desk scale: a few modes, a few channels.

#include <benchmark/benchmark.h>

#include <random>

#include "qls/analysis.hpp"
#include "qls/cascade.hpp"
#include "qls/dup.hpp"
#include "qls/estimate.hpp"
#include "qls/identify.hpp"
#include "qls/random.hpp"
#include "qls/solvers.hpp"

namespace {

using namespace qls;

RandomSystem fixed_system(Index modes, Index channels) {
  std::mt19937_64 rng(42);
  RandomSystemOptions opt;
  opt.modes = modes;
  opt.channels = channels;
  return random_realizable_system(rng, opt);
}

void bm_lyapunov(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(7);
  const Mat a = random_complex_matrix(rng, n, n) - 3.0 * Mat::Identity(n, n);
  const Mat r = random_complex_matrix(rng, n, n);
  const Mat q = ((r + r.adjoint()) / 2.0).eval();
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(a, q));
}
BENCHMARK(bm_lyapunov)->Arg(4)->Arg(8)->Arg(16);

void bm_transfer_sweep(benchmark::State& state) {
  const RandomSystem sys = fixed_system(state.range(0), 2);
  const std::vector<double> omegas = probe_frequencies(1.0, 50);
  for (auto _ : state)
    for (double w : omegas) benchmark::DoNotOptimize(transfer_at(sys.ss, Cplx(0.0, -w)).xi);
}
BENCHMARK(bm_transfer_sweep)->Arg(1)->Arg(2)->Arg(3);

void bm_flat_factorize(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(11);
  const Mat t = random_symplectic(rng, n);
  const Mat w = (flat(t) * t).eval();
  for (auto _ : state) benchmark::DoNotOptimize(flat_factorize(w));
}
BENCHMARK(bm_flat_factorize)->Arg(1)->Arg(2)->Arg(4);

void bm_identify_round_trip(benchmark::State& state) {
  const RandomSystem sys = fixed_system(state.range(0), 1);
  const GaussianInput vac = GaussianInput::vacuum(1);
  for (auto _ : state) benchmark::DoNotOptimize(identify_from_model(sys.ss, vac));
}
BENCHMARK(bm_identify_round_trip)->Arg(1)->Arg(2);

void bm_exact_fit(benchmark::State& state) {
  const RandomSystem sys = fixed_system(state.range(0), 1);
  const GaussianInput vac = GaussianInput::vacuum(1);
  std::vector<double> omegas(41);
  for (int i = 0; i < 41; ++i) omegas[i] = 0.05 * std::pow(400.0, i / 40.0);
  const SpectrumDataset data = exact_dataset(sys.ss, vac, omegas);
  for (auto _ : state) benchmark::DoNotOptimize(fit_realization(data));
}
BENCHMARK(bm_exact_fit)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
