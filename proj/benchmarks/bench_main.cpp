#include <benchmark/benchmark.h>

#include "structsum/rng.hpp"
#include "structsum/tree.hpp"

namespace {

structsum::EdgeScores random_scores(std::size_t n, std::uint64_t seed) {
  structsum::Rng rng(seed);
  structsum::EdgeScores s;
  s.n = n;
  s.f = structsum::Matrix(n, n);
  for (double& v : s.f.data()) v = rng.uniform(-2.0, 2.0);
  s.r.resize(n);
  for (double& v : s.r) v = rng.uniform(-2.0, 2.0);
  return s;
}

void BM_Marginals(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) benchmark::DoNotOptimize(structsum::marginals(scores));
}
BENCHMARK(BM_Marginals)->Arg(8)->Arg(32)->Arg(100);

void BM_CleDecode(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) benchmark::DoNotOptimize(structsum::cle_decode(scores));
}
BENCHMARK(BM_CleDecode)->Arg(8)->Arg(32)->Arg(100);

void BM_GradScores(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto scores = random_scores(n, 42);
  structsum::MarginalsUpstream up;
  up.d_log_z = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(structsum::grad_scores(scores, up));
}
BENCHMARK(BM_GradScores)->Arg(8)->Arg(32)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
