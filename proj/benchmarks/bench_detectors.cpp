#include <vector>

#include <benchmark/benchmark.h>

#include "qcd/bounds.hpp"
#include "qcd/detectors.hpp"
#include "qcd/harness.hpp"
#include "qcd/random.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  qcd::RandomStream rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.normal();
  return xs;
}

// Pre-change stream of length state.range(0), never crossing the threshold.
void run_detector(benchmark::State& state, qcd::DetectorSpec spec) {
  const auto n = static_cast<std::int64_t>(state.range(0));
  const auto xs = noise(static_cast<std::size_t>(n), 1);
  const std::optional<qcd::GaussianPair> model =
      qcd::uses_model(spec.kind) ? std::optional(qcd::GaussianPair(0, 1, 1)) : std::nullopt;
  for (auto _ : state) {
    qcd::Detector d(spec, model);
    auto stop = d.run([&](std::int64_t i) { return xs[static_cast<std::size_t>(i - 1)]; }, n);
    benchmark::DoNotOptimize(stop);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_TvtCusum(benchmark::State& s) { run_detector(s, {.kind = qcd::DetectorKind::tvt_cusum}); }
void BM_TvtSr(benchmark::State& s) { run_detector(s, {.kind = qcd::DetectorKind::tvt_sr}); }
void BM_GlrWindowed(benchmark::State& s) {
  run_detector(s, {.kind = qcd::DetectorKind::glr, .window = 700});
}
void BM_Glr(benchmark::State& s) { run_detector(s, {.kind = qcd::DetectorKind::glr}); }
void BM_Gsr(benchmark::State& s) { run_detector(s, {.kind = qcd::DetectorKind::gsr}); }

void BM_ExactGlrStatistic(benchmark::State& state) {
  const auto n = static_cast<std::int64_t>(state.range(0));
  const auto xs = noise(static_cast<std::size_t>(n), 2);
  for (auto _ : state) {
    qcd::Detector d({.kind = qcd::DetectorKind::glr, .window = 700}, std::nullopt);
    for (double x : xs) benchmark::DoNotOptimize(d.step(x).statistic);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_GaussianDraw(benchmark::State& state) {
  qcd::RandomStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
  state.SetItemsProcessed(state.iterations());
}

void BM_TvtUpperBound(benchmark::State& state) {
  qcd::BoundQuery q;
  for (auto _ : state) benchmark::DoNotOptimize(qcd::tvt_latency_upper_bound(q));
}

void BM_FalseAlarmTrial(benchmark::State& state) {
  qcd::ExperimentConfig cfg;
  cfg.detector.kind = qcd::DetectorKind::tvt_cusum;
  cfg.horizon = 2000;
  std::int64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(qcd::run_trial(cfg, std::nullopt, trial++));
  state.SetItemsProcessed(state.iterations() * cfg.horizon);
}

}  // namespace

BENCHMARK(BM_TvtCusum)->Arg(20000);
BENCHMARK(BM_TvtSr)->Arg(20000);
BENCHMARK(BM_GlrWindowed)->Arg(5000)->Arg(20000);
BENCHMARK(BM_Glr)->Arg(2000)->Arg(20000);
BENCHMARK(BM_Gsr)->Arg(2000)->Arg(20000);
BENCHMARK(BM_ExactGlrStatistic)->Arg(5000);
BENCHMARK(BM_GaussianDraw);
BENCHMARK(BM_TvtUpperBound);
BENCHMARK(BM_FalseAlarmTrial);

BENCHMARK_MAIN();
