#include <benchmark/benchmark.h>

#include "pmjls/clarabel_backend.h"
#include "pmjls/synthesis.h"
#include "support.h"

using namespace pmjls;

static void BM_BuildP1(benchmark::State& state) {
  const PeriodicMjlsModel m = ActuatorFailureExample();
  const SynthesisSpecP1 spec = testing::ExampleSpecP1();
  for (auto _ : state) benchmark::DoNotOptimize(BuildP1Sdp(m, spec));
}
BENCHMARK(BM_BuildP1)->Unit(benchmark::kMillisecond);

static void BM_SynthesizeP1(benchmark::State& state) {
  const PeriodicMjlsModel m = ActuatorFailureExample();
  const SynthesisSpecP1 spec = testing::ExampleSpecP1();
  sdp::ClarabelBackend backend;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SynthesizeP1(m, spec, kDefaultSynthesisEpsilon, backend));
  }
}
BENCHMARK(BM_SynthesizeP1)->Unit(benchmark::kMillisecond);

static void BM_SynthesizeP2(benchmark::State& state) {
  const PeriodicMjlsModel m = ActuatorFailureExample();
  const SynthesisSpecP2 spec = testing::ExampleSpecP2();
  sdp::ClarabelBackend backend;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SynthesizeP2(m, spec, kDefaultSynthesisEpsilon, backend));
  }
}
BENCHMARK(BM_SynthesizeP2)->Unit(benchmark::kMillisecond);

static void BM_LyapunovFeasibility(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int period = static_cast<int>(state.range(0));
  ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 2, 2, period, 0.3);
  sdp::ClarabelBackend backend;
  for (auto _ : state) benchmark::DoNotOptimize(LyapunovFeasibility(cl, 1e-6, backend));
}
BENCHMARK(BM_LyapunovFeasibility)->Arg(1)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);
