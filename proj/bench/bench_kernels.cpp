#include <benchmark/benchmark.h>

#include <omp.h>

#include <vector>

#include "sepeff/bootstrap.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/pipeline.hpp"
#include "sepeff/reference.hpp"
#include "sepeff/simulation.hpp"

namespace {

using namespace sepeff;

const Dataset& sample(std::size_t n) {
  static std::vector<std::pair<std::size_t, Dataset>> cache;
  for (const auto& [size, d] : cache) {
    if (size == n) return d;
  }
  DgpConfig cfg;
  cfg.n = n;
  cfg.seed = 1;
  cache.emplace_back(n, generate_dataset(cfg).observed);
  return cache.back().second;
}

struct Fitted {
  PipelineModels models;
  std::vector<double> cumhaz;
  std::vector<double> w;
};

Fitted fitted(const Dataset& d) {
  const std::vector<double> w(d.size(), 1.0);
  PipelineModels m = Pipeline(d).fit(w);
  std::vector<double> cumhaz;
  for (double t = 0.5; t <= 10.0; t += 0.5) cumhaz.push_back(cumhaz_at(m.base, t));
  return {std::move(m), std::move(cumhaz), w};
}

void BM_SubstitutionSerial(benchmark::State& state) {
  const Dataset& d = sample(static_cast<std::size_t>(state.range(0)));
  const Fitted f = fitted(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::substitution_risks_serial(f.models.cox.theta, f.models.med, d, 0, 1, f.cumhaz, f.w));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SubstitutionParallel(benchmark::State& state) {
  const Dataset& d = sample(static_cast<std::size_t>(state.range(0)));
  const Fitted f = fitted(d);
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(substitution_risks(f.models.cox.theta, f.models.med, d, 0, 1, f.cumhaz, f.w));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BootstrapSerial(benchmark::State& state) {
  const Dataset& d = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::bootstrap_effects_serial(d, 5.0, 20, 7));
  }
}

void BM_BootstrapParallel(benchmark::State& state) {
  const Dataset& d = sample(static_cast<std::size_t>(state.range(0)));
  set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_effects(d, 5.0, 20, 7));
  }
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int max_threads = omp_get_num_procs();
  for (long n : {1000L, 5000L, 20000L}) {
    for (int t = 1; t <= max_threads; t *= 2) b->Args({n, t});
  }
}

}  // namespace

BENCHMARK(BM_SubstitutionSerial)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SubstitutionParallel)->Apply(thread_args)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_BootstrapSerial)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)
    ->Args({1000, 1})
    ->Args({5000, 1})
    ->Apply([](benchmark::internal::Benchmark* b) {
      for (int t = 2; t <= omp_get_num_procs(); t *= 2) b->Args({5000, t});
    })
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
