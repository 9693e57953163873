#include <benchmark/benchmark.h>

#include <sstream>

#include "pmjls/simulate.h"
#include "support.h"

using namespace pmjls;

namespace {

struct Fixture {
  PeriodicMjlsModel model = ActuatorFailureExample();
  ControllerGains gains = ControllerGains::Zero(model);
  ClosedLoopSystem cl;
  SimulationConfig config;
  Fixture() {
    for (auto& row : gains.K) row[0] = Matrix{{-0.2, -0.5}};
    cl = CloseLoop(model, gains);
    config.initial = HullInitialStates{testing::ExampleSpecP1().hull_vertices};
    config.rho = Vector::Constant(2, 0.5);
    config.threads = 1;
  }
};

}  // namespace

static void BM_MonteCarlo(benchmark::State& state) {
  Fixture f;
  f.config.n_trajectories = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(MonteCarlo(f.cl, f.gains, f.config, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * f.config.horizon);
}
BENCHMARK(BM_MonteCarlo)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_MonteCarloWithCsv(benchmark::State& state) {
  Fixture f;
  f.config.n_trajectories = 1000;
  for (auto _ : state) {
    std::ostringstream os;
    MonteCarlo(f.cl, f.gains, f.config, {}, &os);
    benchmark::DoNotOptimize(os.str().size());
  }
}
BENCHMARK(BM_MonteCarloWithCsv)->Unit(benchmark::kMillisecond);

static void BM_PropagateCovariance(benchmark::State& state) {
  Fixture f;
  const ModeIndexedSet x0 = InitialSecondMoment(f.config.initial, f.config.rho, 2);
  for (auto _ : state) benchmark::DoNotOptimize(PropagateCovariance(f.cl, x0, 100));
}
BENCHMARK(BM_PropagateCovariance);
