#include <benchmark/benchmark.h>

#include "kbal/estimators.hpp"
#include "kbal/kernels.hpp"
#include "kbal/rng.hpp"
#include "kbal/simbench.hpp"
#include "kbal/solver.hpp"

namespace {

kbal::Dataset make_data(int n) {
  kbal::DgpSpec dgp;
  kbal::RngStream rng = kbal::replication_stream(1, 0);
  return kbal::gen_dataset(dgp, n, rng);
}

void bm_gram(benchmark::State& state) {
  const kbal::Dataset data = make_data(static_cast<int>(state.range(0)));
  const kbal::KernelSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kbal::gram_blocks(data, spec));
  }
}

void bm_solve(benchmark::State& state) {
  const kbal::Dataset data = make_data(static_cast<int>(state.range(0)));
  const kbal::KernelSpec spec;
  const kbal::GramBlocks blocks = kbal::gram_blocks(data, spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kbal::solve_weights(blocks, data.n(), 0.01));
  }
}

void bm_replication(benchmark::State& state) {
  const kbal::DgpSpec dgp;
  const kbal::EstimateOptions opts;
  const int n = static_cast<int>(state.range(0));
  std::uint64_t r = 0;
  for (auto _ : state) {
    kbal::RngStream rng = kbal::replication_stream(2, r++);
    const kbal::Dataset data = kbal::gen_dataset(dgp, n, rng);
    kbal::EstimateSession session(data, opts);
    benchmark::DoNotOptimize(session.estimate_all({"ml", "mlt", "ols", "ipw", "aipw"}));
  }
}

}  // namespace

BENCHMARK(bm_gram)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_solve)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_replication)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
