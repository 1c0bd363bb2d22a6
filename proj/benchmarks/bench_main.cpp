#include <benchmark/benchmark.h>

#include <vector>

#include "eegraph/compressor.hpp"
#include "eegraph/layers.hpp"
#include "eegraph/model.hpp"
#include "eegraph/montage.hpp"
#include "eegraph/rng.hpp"
#include "eegraph/tensor.hpp"
#include "eegraph/wl.hpp"

namespace {

using namespace eegraph;

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  auto rng = make_rng(seed, "bench", 0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = gaussian(rng);
  return Tensor::from_vector({rows, cols}, std::move(v));
}

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a = random_matrix(n, n, 1);
  Tensor b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(BM_matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_wl_refine(benchmark::State& state) {
  Montage m = reference_montage_errp56();
  Graph g = build_graph(m, EdgePolicy::knng(4));
  for (auto _ : state) benchmark::DoNotOptimize(wl_refine(g));
}
BENCHMARK(BM_wl_refine);

void BM_sage_forward(benchmark::State& state) {
  Montage m = reference_montage_rsvp16();
  Graph g = build_graph(m, EdgePolicy::knng(2));
  auto rng = make_rng(3, "init", 0);
  GraphSageLayer layer(32, 32, rng);
  Tensor h = random_matrix(16, 32, 4);
  NoGradGuard eval;
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(g, h));
}
BENCHMARK(BM_sage_forward);

void BM_gin_forward(benchmark::State& state) {
  Montage m = reference_montage_rsvp16();
  Graph g = build_graph(m, EdgePolicy::knng(2));
  auto rng = make_rng(5, "init", 0);
  GinLayer layer(32, 32, 32, rng);
  Tensor h = random_matrix(16, 32, 6);
  NoGradGuard eval;
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(g, h));
}
BENCHMARK(BM_gin_forward);

void BM_compressor(benchmark::State& state) {
  auto rng = make_rng(7, "init", 0);
  Compressor comp(16, 250, rng);
  Tensor trial = random_matrix(16, 250, 8);
  NoGradGuard eval;
  for (auto _ : state) benchmark::DoNotOptimize(comp.forward(trial, false));
}
BENCHMARK(BM_compressor);

void BM_trial_forward(benchmark::State& state) {
  Montage m = reference_montage_rsvp16();
  Graph g = build_graph(m, EdgePolicy::knng(1));
  ModelSpec spec;
  Network net(spec, g, 16, 64, 2, 9);
  Tensor trial = random_matrix(16, 64, 10);
  NoGradGuard eval;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(trial, false));
}
BENCHMARK(BM_trial_forward);

}  // namespace

BENCHMARK_MAIN();
