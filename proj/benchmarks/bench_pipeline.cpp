#include <cmath>
#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "modeshape/clustering.hpp"
#include "modeshape/decomp.hpp"
#include "modeshape/observation.hpp"
#include "modeshape/synth.hpp"

using namespace modeshape;

namespace {

ScenarioSpec ringdown(std::size_t channels, double fs) {
  ScenarioSpec s;
  s.duration_s = 80.0;
  s.sample_rate_hz = fs;
  s.noise_std = 0.004;
  s.rng_seed = 1;
  std::vector<std::complex<double>> inter, local;
  for (std::size_t i = 0; i < channels; ++i) {
    inter.push_back(i < channels / 2 ? -0.4 : 0.7);
    local.push_back(std::polar(1.0 - 0.5 * static_cast<double>(i) / static_cast<double>(channels),
                               std::numbers::pi * static_cast<double>(i % 3) / 3.0));
  }
  s.modes.push_back({0.5, -0.15, inter, {1.0, 0.0}});
  s.modes.push_back({0.7, -0.18, local, {0.5, 0.0}});
  for (double t : {0.0, 20.0, 40.0, 60.0}) s.events.push_back({t, {}});
  return s;
}

void BM_TwoLayer(benchmark::State& state) {
  const auto cs = generate(ringdown(static_cast<std::size_t>(state.range(0)), 50.0));
  Eigen::MatrixXd x = cs.samples.leftCols(500);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i).array() -= x.row(i).mean();
  for (auto _ : state) benchmark::DoNotOptimize(two_layer(x, 50.0));
}
BENCHMARK(BM_TwoLayer)->Arg(4)->Arg(16)->Arg(64);

void BM_KMeans(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  const auto q = state.range(0);
  Eigen::MatrixXd p(q, 10);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index d = 0; d < 10; ++d) p(i, d) = g(rng) + (d == 0 ? 5.0 * static_cast<double>(i % 4) : 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(p, 4, 7));
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(1000);

void BM_RunPart1(benchmark::State& state) {
  const auto cs = generate(ringdown(4, 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(run_part1(cs));
}
BENCHMARK(BM_RunPart1)->Unit(benchmark::kMillisecond);

void BM_SelectAndCluster(benchmark::State& state) {
  const auto obs = run_part1(generate(ringdown(4, 10.0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_and_cluster(obs));
}
BENCHMARK(BM_SelectAndCluster)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
