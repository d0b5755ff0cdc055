// Serial reference vs OpenMP scoring kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "sje/kernels.hpp"

namespace {

sje::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  sje::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// N samples, D = 1024 input features, E = 85 attributes, 50 candidate classes.
struct Problem {
  sje::Matrix features, W, phi;
  explicit Problem(Eigen::Index n)
      : features(random_matrix(n, 1024, 1)), W(random_matrix(1024, 85, 2)), phi(random_matrix(50, 85, 3)) {}
};

void BM_ScoreSerial(benchmark::State& state) {
  Problem p(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sje::kernels::score_matrix_serial(p.features, p.W, p.phi));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreOmp(benchmark::State& state) {
  Problem p(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sje::kernels::score_matrix(p.features, p.W, p.phi));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_WeightedArgmaxSerial(benchmark::State& state) {
  std::vector<sje::Matrix> s{random_matrix(state.range(0), 50, 4), random_matrix(state.range(0), 50, 5)};
  std::vector<double> alpha{0.3, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(sje::kernels::weighted_argmax_rows_serial(s, alpha));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_WeightedArgmaxOmp(benchmark::State& state) {
  std::vector<sje::Matrix> s{random_matrix(state.range(0), 50, 4), random_matrix(state.range(0), 50, 5)};
  std::vector<double> alpha{0.3, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(sje::kernels::weighted_argmax_rows(s, alpha));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_ScoreOmp)->Arg(256)->Arg(2048);
BENCHMARK(BM_WeightedArgmaxSerial)->Arg(4096)->Arg(65536);
BENCHMARK(BM_WeightedArgmaxOmp)->Arg(4096)->Arg(65536);

BENCHMARK_MAIN();
