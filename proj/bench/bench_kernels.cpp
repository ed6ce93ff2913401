// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include "leoslice/constellation.hpp"
#include "leoslice/predictor.hpp"
#include "leoslice/slicer.hpp"

using namespace leoslice;

namespace {

const ConstellationConfig kShell;
const GroundArea kArea;

void BM_ScheduleParallel(benchmark::State &state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_schedule(kShell, kArea, 90, 10.0, 10));
  }
}
BENCHMARK(BM_ScheduleParallel)->Unit(benchmark::kMillisecond);

void BM_ScheduleSerial(benchmark::State &state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::build_schedule_serial(kShell, kArea, 90, 10.0, 10));
  }
}
BENCHMARK(BM_ScheduleSerial)->Unit(benchmark::kMillisecond);

struct PredictFixture {
  BnnModel model{10, 16, 1.0, -2.0, 7};
  std::vector<DemandFeature> history;
  PredictFixture() {
    for (int i = 0; i < 10; ++i) {
      history.push_back({25.0 + i, 25.0});
    }
    std::vector<DemandFeature> fit = history;
    model.normalization() = FeatureNormalization::fit(fit);
  }
};

void BM_PredictParallel(benchmark::State &state) {
  PredictFixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(f.model, f.history, static_cast<int>(state.range(0)), 3));
  }
}
BENCHMARK(BM_PredictParallel)->Arg(30)->Arg(300);

void BM_PredictSerial(benchmark::State &state) {
  PredictFixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::predict_serial(f.model, f.history, static_cast<int>(state.range(0)), 3));
  }
}
BENCHMARK(BM_PredictSerial)->Arg(30)->Arg(300);

SliceProblem window_problem() {
  static const CoverageSchedule schedule = build_schedule(kShell, kArea, 10, 10.0, 10);
  std::vector<SlotDemand> demand(10, FittedDemandDistribution{PoissonFit{25.0, 2.0}});
  return SliceProblem::from_schedule(schedule, 0, 0, demand, LinkParams{});
}

void BM_SolveParallel(benchmark::State &state) {
  const SliceProblem p = window_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_window(p));
  }
}
BENCHMARK(BM_SolveParallel)->Unit(benchmark::kMillisecond);

void BM_SolveSerial(benchmark::State &state) {
  const SliceProblem p = window_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::solve_window_serial(p));
  }
}
BENCHMARK(BM_SolveSerial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
