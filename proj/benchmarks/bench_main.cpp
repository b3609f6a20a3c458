#include <benchmark/benchmark.h>

#include "pmsm/config.hpp"
#include "pmsm/engine.hpp"
#include "pmsm/integrator.hpp"
#include "pmsm/observer.hpp"
#include "pmsm/plant.hpp"

namespace {

using namespace pmsm;

void BM_PlantRk3Step(benchmark::State& state) {
  const ConfigFile c = default_config();
  const MotorParams& p = c.motor;
  StateVector<4> y{0.0, 1.0, 50.0, 0.0};
  const AlphaBeta u_ab{10.0, 20.0};
  for (auto _ : state) {
    y = rk3_step<4>(y, [&](const StateVector<4>& v) {
      const PlantState s{v[0], v[1], v[2], v[3]};
      const CurrentDerivatives di = electrical_derivatives(s, park(u_ab, s.theta_e), p);
      return StateVector<4>{di.di_d, di.di_q,
                            mechanical_derivative(s, torque(s, p), {}, p),
                            angle_derivative(s, p)};
    }, c.sim.dt);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_PlantRk3Step);

void BM_ObserverUpdate(benchmark::State& state) {
  const ConfigFile c = default_config();
  SlidingModeObserver obs(c.motor, c.smo);
  double theta = 0.0;
  for (auto _ : state) {
    obs.update(inverse_park({0.0, 1.0}, theta), inverse_park({0.0, 100.0}, theta),
               c.sim.dt);
    theta = wrap_angle(theta + 1e-4);
    benchmark::DoNotOptimize(obs.state());
  }
}
BENCHMARK(BM_ObserverUpdate);

void BM_SensorlessRun10ms(benchmark::State& state) {
  ConfigFile c = default_config();
  c.sim.t_end = 0.01;
  const ControlSettings gains = c.control.synthesize(c.motor);
  for (auto _ : state) {
    RunLog log = run(c.scenario, c.sim, c.motor, gains, c.smo);
    benchmark::DoNotOptimize(log.records.data());
  }
  state.SetItemsProcessed(state.iterations() * step_count(c.sim.t_end, c.sim.dt));
}
BENCHMARK(BM_SensorlessRun10ms)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
