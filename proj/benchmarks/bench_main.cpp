#include <benchmark/benchmark.h>

#include <vector>

#include "mnardre/corrupt.hpp"
#include "mnardre/kliep.hpp"
#include "mnardre/np_classifier.hpp"
#include "mnardre/scenarios.hpp"

using namespace mnardre;

namespace {

ScenarioDraw gauss_draw(std::size_t n) { return generate(make_model(Scenario::Gauss5D), n, n, 42); }

WeightingMode gauss_mode() {
  const auto m = make_model(Scenario::Gauss5D);
  return WeightingMode::mnar(m.phi0, m.phi1);
}

}  // namespace

static void BM_KliepObjective(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto prepared = prepare(gauss_draw(n).corrupted, FeatureMap::identity(5), gauss_mode());
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(kliep_objective(theta, prepared));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}
BENCHMARK(BM_KliepObjective)->RangeMultiplier(4)->Range(256, 16384);

static void BM_MKliepFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto draw = gauss_draw(n);
  KliepFitConfig config;
  config.weighting = gauss_mode();
  for (auto _ : state) benchmark::DoNotOptimize(fit(draw.corrupted, FeatureMap::identity(5), config));
}
BENCHMARK(BM_MKliepFit)->Arg(100)->Arg(1500)->Arg(8000)->Unit(benchmark::kMillisecond);

static void BM_ThresholdMissing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> scores(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.normal();
    weights[i] = 1.0 + rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(threshold_missing(scores, weights, 0.1, 0.05));
}
BENCHMARK(BM_ThresholdMissing)->RangeMultiplier(8)->Range(512, 262144);

static void BM_ThresholdBinomial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> scores(n);
  for (auto& s : scores) s = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(threshold_binomial(scores, 0.1, 0.1));
}
BENCHMARK(BM_ThresholdBinomial)->RangeMultiplier(8)->Range(512, 262144);

static void BM_Corrupt(benchmark::State& state) {
  const auto model = make_model(Scenario::Mixture2D);
  Rng rng(5);
  const Eigen::MatrixXd rows = model.p1.sample(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corrupt(rows, 1, model.phi1, 6));
}
BENCHMARK(BM_Corrupt)->Arg(100000);

BENCHMARK_MAIN();
