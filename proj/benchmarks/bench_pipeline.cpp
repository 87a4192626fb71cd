#include <benchmark/benchmark.h>

#include "netspill/estimator.hpp"
#include "netspill/simulate.hpp"

namespace {

using namespace netspill;

SimulationConfig bench_config(int n_per_group, int T, int ba_m) {
  SimulationConfig config;
  config.n_per_group = n_per_group;
  config.T = T;
  config.clusters_total = 10;
  config.ba_m = ba_m;
  config.seed = 12345;
  config.params.alpha_B = config.params.alpha_F = 0.4;
  config.params.beta_FB = 0.3;
  return config;
}

void BM_HelmertClusterTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DgpDraw draw = simulate_panel(bench_config(n, 5, 1));
  const HelmertWeights weights(draw.data.T);
  std::vector<Eigen::MatrixXd> series;
  for (int t = 1; t <= draw.data.T; ++t) series.push_back(draw.data.y.col(t));
  for (auto _ : state) {
    auto out = helmert_cluster_transform(series, draw.data.clusters, weights);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_HelmertClusterTransform)->Arg(500)->Arg(5000);

void BM_BuildInstruments(benchmark::State& state) {
  const DgpDraw draw = simulate_panel(bench_config(500, 5, 1));
  const HelmertWeights weights(draw.data.T);
  const RegressorPanel regs = build_regressors(draw.data, draw.nets);
  const auto W_H =
      helmert_cluster_transform(regs.W, draw.data.clusters, weights);
  for (auto _ : state) {
    auto Z = build_instruments(IvOption::ProjB, regs, W_H, draw.data.clusters);
    benchmark::DoNotOptimize(Z);
  }
}
BENCHMARK(BM_BuildInstruments);

void BM_SimulatePanel(benchmark::State& state) {
  const SimulationConfig config =
      bench_config(static_cast<int>(state.range(0)), 5,
                   static_cast<int>(state.range(1)));
  for (auto _ : state) {
    DgpDraw draw = simulate_panel(config);
    benchmark::DoNotOptimize(draw);
  }
}
BENCHMARK(BM_SimulatePanel)->Args({500, 1})->Args({500, 9})->Args({5000, 9});

void BM_FullEstimate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const IvOption iv = static_cast<IvOption>(state.range(1));
  const DgpDraw draw = simulate_panel(bench_config(n, 5, 1));
  for (auto _ : state) {
    EstimationResult res = estimate(draw.data, draw.nets, iv, 0.05);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_FullEstimate)
    ->Args({500, static_cast<int>(IvOption::Simple)})
    ->Args({500, static_cast<int>(IvOption::ProjA)})
    ->Args({500, static_cast<int>(IvOption::ProjC)})
    ->Args({5000, static_cast<int>(IvOption::ProjA)});

}  // namespace

BENCHMARK_MAIN();
