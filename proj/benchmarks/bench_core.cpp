#include <benchmark/benchmark.h>

#include "subpoisson/criteria.hpp"
#include "subpoisson/detector.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/reconstruction.hpp"

using namespace subpoisson;

namespace {

const TwinBeamParams kParams{270.0, 0.032, 0.01, 7.6, 0.026, 5.3};
const DetectorParams kSignal = DetectorParams::with_total_dark(6528, 0.230, 0.04);
const DetectorParams kIdler = DetectorParams::with_total_dark(6784, 0.220, 0.04);

void BM_MandelRicePmf(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mandel_rice_pmf(270.0, 0.032, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_MandelRicePmf)->Arg(64)->Arg(256);

void BM_TwbJointPmf(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(twb_joint_pmf_auto(kParams));
  }
}
BENCHMARK(BM_TwbJointPmf);

void BM_DetectionMatrix(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(detection_matrix(kSignal, 40, n_max));
  }
  state.SetComplexityN(n_max);
}
BENCHMARK(BM_DetectionMatrix)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_ConditionalTheoretical(benchmark::State& state) {
  const auto joint = twb_joint_pmf_auto(kParams);
  const auto mat = detection_matrix(kSignal, 40, joint.ns_max());
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_theoretical(joint, mat, 5));
  }
}
BENCHMARK(BM_ConditionalTheoretical);

void BM_SampleShots(benchmark::State& state) {
  TwbSampler sampler(kParams, 1);
  std::mt19937_64 engine(2);
  long long clicks = 0;
  for (auto _ : state) {
    const auto s = sampler();
    clicks += sample_photocount(kSignal, s.n_s, engine);
    clicks += sample_photocount(kIdler, s.n_i, engine);
  }
  benchmark::DoNotOptimize(clicks);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleShots);

void BM_EmRun(benchmark::State& state) {
  const auto joint = twb_joint_pmf_auto(kParams);
  const auto mat_s = detection_matrix(kSignal, 40, joint.ns_max());
  const auto cond = conditional_theoretical(joint, mat_s, 5);
  const auto mat_i = detection_matrix(kIdler, 40, 48);
  CountDistribution truncated{
      std::vector<double>(cond.probs().begin(), cond.probs().begin() + 49)};
  const auto hist = forward_photocount(truncated.normalized(), mat_i).normalized();
  EMConfig config;
  config.max_iters = static_cast<int>(state.range(0));
  config.tol = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_reconstruct(hist, mat_i, config));
  }
}
BENCHMARK(BM_EmRun)->Arg(100)->Arg(1000);

void BM_FullReport(benchmark::State& state) {
  const auto joint = twb_joint_pmf_auto(kParams);
  const auto mat_s = detection_matrix(kSignal, 40, joint.ns_max());
  const auto cond = conditional_theoretical(joint, mat_s, 5);
  ReportConfig config;
  config.k_max = 5;
  config.k_max_elements = 9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_report(cond, config));
  }
}
BENCHMARK(BM_FullReport);

void BM_QuasiDistribution(benchmark::State& state) {
  const auto joint = twb_joint_pmf_auto(kParams);
  const auto mat_s = detection_matrix(kSignal, 40, joint.ns_max());
  const auto cond = conditional_theoretical(joint, mat_s, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quasi_distribution(cond, 0.9));
  }
}
BENCHMARK(BM_QuasiDistribution);

}  // namespace

BENCHMARK_MAIN();
