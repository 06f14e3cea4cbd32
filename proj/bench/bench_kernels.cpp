// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <vector>

#include "prmix/chain.hpp"
#include "prmix/kernels.hpp"
#include "prmix/lumped.hpp"
#include "prmix/parallel.hpp"
#include "prmix/rng.hpp"
#include "prmix/statistics.hpp"

using namespace prmix;

namespace {

const LumpedChain& chain_for(int n) {
  static std::vector<std::pair<int, LumpedChain>> cache;
  for (const auto& [k, c] : cache)
    if (k == n) return c;
  auto g = build_group(parse_group_spec("Z3"));
  cache.emplace_back(n, build_lumped(g, n, star_config(g, n)));
  return cache.back().second;
}

std::vector<double> start_vector(const LumpedChain& c) {
  std::vector<double> mu(c.size(), 0.0);
  mu[0] = 1.0;
  std::vector<double> out(c.size());
  for (int t = 0; t < 50; ++t) {
    step_distribution(c.kernel_t, mu, out);
    mu.swap(out);
  }
  return mu;
}

void BM_StepPull(benchmark::State& state) {
  const LumpedChain& c = chain_for(static_cast<int>(state.range(0)));
  const auto mu = start_vector(c);
  std::vector<double> out(c.size());
  for (auto _ : state) {
    step_distribution(c.kernel_t, mu, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["states"] = static_cast<double>(c.size());
  state.counters["nnz"] = static_cast<double>(c.kernel.nnz());
}

void BM_StepPushSerial(benchmark::State& state) {
  const LumpedChain& c = chain_for(static_cast<int>(state.range(0)));
  const auto mu = start_vector(c);
  std::vector<double> out(c.size());
  for (auto _ : state) {
    step_distribution_serial(c.kernel, mu, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["states"] = static_cast<double>(c.size());
}

void BM_Tv(benchmark::State& state) {
  const LumpedChain& c = chain_for(static_cast<int>(state.range(0)));
  const auto mu = start_vector(c);
  for (auto _ : state) benchmark::DoNotOptimize(tv_distance(mu, c.stationary));
}

void BM_TvSerial(benchmark::State& state) {
  const LumpedChain& c = chain_for(static_cast<int>(state.range(0)));
  const auto mu = start_vector(c);
  for (auto _ : state) benchmark::DoNotOptimize(tv_distance_serial(mu, c.stationary));
}

auto replica_fn(int n) {
  return [n](std::size_t r) {
    static const GroupPtr g = build_group(parse_group_spec("S3"));
    Rng rng(11, r);
    Configuration sigma = star_config(g, n);
    for (int t = 0; t < 20 * n; ++t) apply_move(sigma, sample_move(n, rng));
    return static_cast<double>(counts(sigma)[0]);
  };
}

void BM_Replicas(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_replicas(64, replica_fn(n)));
}

void BM_ReplicasSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_replicas_serial(64, replica_fn(n)));
}

}  // namespace

BENCHMARK(BM_StepPull)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StepPushSerial)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Tv)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TvSerial)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Replicas)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicasSerial)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
