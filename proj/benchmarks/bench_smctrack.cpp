#include <benchmark/benchmark.h>

#include "smctrack/attention.hpp"
#include "smctrack/hungarian.hpp"
#include "smctrack/kalman.hpp"
#include "smctrack/metrics.hpp"
#include "smctrack/random.hpp"
#include "smctrack/scenario.hpp"
#include "smctrack/tracker.hpp"

namespace {

using namespace smctrack;

void BM_Iou(benchmark::State& state) {
  const BoundingBox a{10, 10, 40, 80};
  const BoundingBox b{30, 20, 40, 80};
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(a, b));
  }
}
BENCHMARK(BM_Iou);

void BM_HungarianSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(11);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
  const CostMatrix cost(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hungarian_solve(cost));
  }
}
BENCHMARK(BM_HungarianSolve)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_KalmanCycle(benchmark::State& state) {
  KalmanState kf = kf_initiate(BoundingBox{100, 100, 40, 80});
  const BoundingBox measurement{102, 101, 40, 80};
  for (auto _ : state) {
    kf = kf_update(kf_predict(kf), measurement);
    benchmark::DoNotOptimize(kf.mean);
  }
}
BENCHMARK(BM_KalmanCycle);

void BM_IsaForward(benchmark::State& state) {
  Rng rng(12);
  FeatureMap fm = FeatureMap::zeros(8, 28, 10);  // default crop through 8x8 patches
  for (auto& v : fm.values) v = rng.gaussian();
  const SliceSet slices = slice_feature_map(fm);
  const AttentionParams params = make_random_attention_params(8, 16, 128, 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(isa_forward(slices, params));
  }
}
BENCHMARK(BM_IsaForward);

void BM_SmcStep(benchmark::State& state) {
  const int identities = static_cast<int>(state.range(0));
  const GeneratedScenario scenario =
      generate_scenario(lane_scenario(identities, 300, 14, 0.0, 0.05));
  TrackerConfig cfg;
  cfg.split_mode = SplitMode::Fixed;
  cfg.fixed_split_threshold = 0.6;
  for (auto _ : state) {
    SmcTracker tracker(cfg);
    for (const auto& frame : scenario.detections) {
      benchmark::DoNotOptimize(tracker.step(frame));
    }
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(scenario.detections.size()));
}
BENCHMARK(BM_SmcStep)->Arg(5)->Arg(10)->Arg(20);

void BM_ClearMot(benchmark::State& state) {
  const GeneratedScenario scenario =
      generate_scenario(lane_scenario(10, 300, 15, 0.05, 0.0));
  TrackerConfig cfg;
  cfg.split_mode = SplitMode::Fixed;
  cfg.fixed_split_threshold = 0.6;
  const auto results = run_sequence(scenario.detections, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_tracking(scenario.ground_truth, results));
  }
}
BENCHMARK(BM_ClearMot);

}  // namespace

BENCHMARK_MAIN();
